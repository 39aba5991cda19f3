#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "catcomp/catcomp.hpp"

using namespace catcomp;

namespace {

struct Line {
    std::string status;  // PASS, FAIL or INFO
    std::string name;
    std::string detail;
    double seconds = 0;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[1024];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// Collects named checks; a criterion passes only if every check passes.
struct Checks {
    bool ok = true;
    std::vector<std::string> parts;
    void add(bool pass, const std::string& what) {
        ok = ok && pass;
        parts.push_back((pass ? "" : "!") + what);
    }
    std::string text() const {
        std::string s;
        for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? "; " : "") + parts[i];
        return s;
    }
};

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// ------------------------------------------------------------------ criteria

Checks coefficient_table() {
    Checks c;
    SpaceSpec s(60);
    struct Row {
        int db;
        double x, p;
    };
    auto t0 = Clock::now();
    for (Row r : {Row{-3, -2.98, 2.96}, Row{-6, -5.93, 5.71}, Row{-7, -7.24, 5.9}}) {
        ProtocolResult out = run_compression(reference_schedule(r.db), s);
        const double x = measure_compression_db(out.cavity_state, Quadrature::X).db;
        const double p = measure_compression_db(out.cavity_state, Quadrature::P).db;
        c.add(std::abs(x - r.x) <= 0.4, fmt("row %d X %.2f vs %.2f", r.db, x, r.x));
        c.add(std::abs(p - r.p) <= 0.4, fmt("P %+.2f vs %+.2f", p, r.p));
    }
    // the -5 row has no printed theory column; reported for completeness
    ProtocolResult five = run_compression(reference_schedule(-5), s);
    c.parts.push_back(fmt("row -5 X %.2f P %+.2f (no reference)", measure_compression_db(five.cavity_state, Quadrature::X).db,
                          measure_compression_db(five.cavity_state, Quadrature::P).db));
    const double t = since(t0);
    c.add(t < 10.0, fmt("%.1f s < 10 s", t));
    return c;
}

Checks decay_constants() {
    Checks c;
    auto t0 = Clock::now();
    DeviceParams d;
    std::vector<double> times = time_axis(300e-6, 31);
    DecayOptions o;
    std::vector<BlobSeries> series;
    std::vector<DecayClass> cls = default_classes();
    for (const DecayClass& k : cls) {
        const int n = auto_cavity_dim([&](const SpaceSpec& s) { return class_state(k, s); });
        series.push_back(decay_scan(class_state(k, SpaceSpec(n)), times, d, class_blob_center(k), o));
    }
    std::vector<double> tau;
    for (const auto& b : series) tau.push_back(b.tau() * 1e6);
    c.add(std::abs(tau[0] - 42.0) <= 0.15 * 42.0, fmt("uncompressed %.1f us in 42+-15%%", tau[0]));
    bool inc = true;
    for (std::size_t i = 1; i < tau.size(); ++i) inc = inc && tau[i] > tau[i - 1];
    c.add(inc, fmt("increasing %.1f/%.1f/%.1f/%.1f", tau[0], tau[1], tau[2], tau[3]));
    c.add(tau[1] >= 70 && tau[1] <= 105, fmt("-3 %.1f in [70,105]", tau[1]));
    c.add(tau[2] >= 3 * tau[0], fmt("-6.7/uncompressed %.2f >= 3", tau[2] / tau[0]));
    c.add(tau[3] >= tau[2], fmt("-7.6 %.1f >= -6.7 %.1f", tau[3], tau[2]));
    const double published[] = {87.0, 145.0, 147.0};
    for (int i = 0; i < 3; ++i) {
        const BlobSeries& b = series[i + 1];
        c.add(b.in_band(published[i] * 1e-6),
              fmt("published %.0f in band [%.1f,%.1f]", published[i], b.band_lo * 1e6, b.band_hi * 1e6));
    }
    const double t = since(t0);
    c.add(t < 120.0, fmt("%.1f s < 120 s", t));
    return c;
}

Checks parity_optimum() {
    Checks c;
    DeviceParams d;
    DecayOptions dopt;
    dopt.bootstrap = 0;
    SweepResult sw = compression_sweep({0.0, -3.0, -6.0, -9.0, -12.0}, 1.8, time_axis(300e-6, 31), d, dopt);
    std::string taus;
    for (const auto& lv : sw.levels)
        taus += fmt("%s%.0f:%.0f/%.0f", taus.empty() ? "" : " ", lv.level_db, lv.blob.tau() * 1e6, lv.parity.tau() * 1e6);
    const double peak = sw.levels[sw.parity_peak_index].level_db;
    c.add(sw.parity_peak_interior, fmt("parity peak at %.0f dB interior", peak));
    c.add(std::abs(peak + 6.0) <= 3.0, "peak within 3 dB of -6");
    c.add(sw.blob_monotone, "blob tau monotone");
    c.parts.push_back("dB:blob/parity us " + taus);
    return c;
}

Checks oracle_equivalences() {
    Checks c;
    DeviceParams d;
    const double kappa = d.kappa();
    SpaceSpec s(60);
    DensityMatrix cat = to_density(make_cat(1.8, -1, s));
    GridAxes ax = GridAxes::square(-7, 7, 201);
    // the filter interpolates C(sqrt(eta) nu); cubic error at spacing 0.07 is about 1.2e-4, so it is checked at 0.05
    GridAxes fine = GridAxes::square(-6, 6, 241);
    CharGrid c0 = char_function(cat, fine);

    double filt = 0;
    NoiseConfig loss;
    loss.cavity_decay = true;
    loss.kappa = kappa;
    for (double t : {50e-6, 150e-6}) {
        CharGrid f = loss_filter_char(c0, kappa, t);
        DensityMatrix kr = amplitude_damping_fock(cat, kappa, t);
        DensityMatrix li = lindblad_evolve(cat, Matrix::Zero(60, 60), loss, t, t / 400).rho;
        filt = std::max(filt, (f.values - char_function(kr, fine).values).cwiseAbs().maxCoeff());
        filt = std::max(filt, (f.values - char_function(li, fine).values).cwiseAbs().maxCoeff());
    }
    c.add(filt <= 1e-4, fmt("filter vs Kraus/Lindblad %.1e <= 1e-4", filt));

    double gate = 0;
    SpaceSpec gs(40);
    std::vector<int> idx;
    for (int q = 0; q < 2; ++q)
        for (int n = 0; n < 20; ++n) idx.push_back(gs.index(q, n));
    for (int row : {-3, -5, -6, -7})
        for (const UvStep& st : reference_schedule(row).steps)
            for (auto [w, coef] : {std::pair{UV::U, st.u}, std::pair{UV::V, st.v}}) {
                Matrix a = build_uv_gate(w, coef, gs).matrix, b = uv_exponential(w, coef, gs).matrix;
                cplx ov = 0;
                for (int i : idx)
                    for (int j : idx) ov += std::conj(b(i, j)) * a(i, j);
                cplx ph = ov / std::abs(ov);
                for (int i : idx)
                    for (int j : idx) gate = std::max(gate, std::abs(a(i, j) - ph * b(i, j)));
            }
    c.add(gate <= 1e-8, fmt("U/V gates vs exponential %.1e <= 1e-8", gate));

    double par = 0, fid = 0, trip = 0;
    PureState ideal = make_cat(1.8, -1, s);
    CharGrid ci = char_function(ideal, ax);
    for (double t : {0.0, 20e-6, 60e-6, 120e-6}) {
        DensityMatrix rt = amplitude_damping_fock(cat, kappa, t);
        CharGrid g = char_function(rt, ax);
        WignerGrid w = wigner_from_char(g, 4);
        const double pc = parity_from_char(g), pw = parity_from_wigner(w), pf = parity_fock(rt);
        par = std::max({par, std::abs(pc - pw), std::abs(pc - pf), std::abs(pw - pf)});
        fid = std::max(fid, std::abs(overlap_fidelity_char(ci, g).fidelity - state_fidelity(ideal, rt)));
        trip = std::max(trip, (char_from_wigner(w).values - g.values).cwiseAbs().maxCoeff());
    }
    c.add(par <= 1e-2, fmt("parity methods %.1e <= 1e-2", par));
    c.add(fid <= 5e-3, fmt("fidelity char vs Fock %.1e <= 5e-3", fid));
    c.add(trip <= 1e-3, fmt("char-Wigner round trip %.1e <= 1e-3", trip));
    take_warnings();
    return c;
}

Checks optimizer() {
    Checks c;
    auto t0 = Clock::now();
    OptimizeResult first;
    for (Variant v : {Variant::compress_then_displace, Variant::cat_then_compress})
        for (double db : {-3.0, -5.0, -6.0, -7.0}) {
            OptimizeSpec sp;
            sp.variant = v;
            sp.target_db = db;
            OptimizeResult r = optimize_schedule(sp);
            if (v == Variant::compress_then_displace && db == -3.0) first = r;
            c.add(r.overlap > 0.99, fmt("%s %.0f: %.4f", v == Variant::compress_then_displace ? "vac" : "cat", db, r.overlap));
        }
    OptimizeSpec again;
    OptimizeResult r = optimize_schedule(again);
    bool same = r.restart_overlaps == first.restart_overlaps && r.evals == first.evals;
    for (std::size_t k = 0; k < r.schedule.steps.size(); ++k)
        same = same && r.schedule.steps[k].u == first.schedule.steps[k].u && r.schedule.steps[k].v == first.schedule.steps[k].v;
    c.add(same, "rerun with seed 1 identical");
    const double t = since(t0);
    c.add(t < 300.0, fmt("%.0f s < 300 s", t));
    return c;
}

Checks error_budget_check() {
    Checks c;
    DeviceParams d;
    std::vector<BudgetRow> rows = error_budget(d);
    auto get = [&](const std::string& ch) {
        for (const auto& r : rows)
            if (r.channel == ch) return r.infidelity;
        return std::nan("");
    };
    for (auto [ch, ref] : {std::pair{"qubit_dephasing", 0.04}, std::pair{"qubit_decay", 0.02}, std::pair{"cavity_dephasing", 0.01}}) {
        const double v = get(ch);
        c.add(v >= ref / 2 && v <= ref * 2, fmt("%s %.2f%% vs %.0f%%", ch, 100 * v, 100 * ref));
    }
    c.add(get("cavity_decay") <= 1e-3, fmt("cavity_decay %.3f%% <= 0.1%%", 100 * get("cavity_decay")));
    const double contrast = vacuum_contrast_estimate(d);
    c.add(contrast >= 0.86 && contrast <= 0.92, fmt("contrast %.3f in [0.86,0.92]", contrast));
    BudgetOptions half;
    half.qubit_convention = QubitDephasing::half_tphi;
    BudgetOptions tphi;
    tphi.qubit_convention = QubitDephasing::tphi;
    NoiseConfig base = NoiseConfig::from_device(d, QubitDephasing::half_tphi);
    NoiseConfig base2 = NoiseConfig::from_device(d, QubitDephasing::tphi);
    c.parts.push_back(fmt("other qubit conventions: half_tphi %.2f%%, tphi %.2f%%",
                          100 * u_gate_infidelity(d, base.only("qubit_dephasing"), half),
                          100 * u_gate_infidelity(d, base2.only("qubit_dephasing"), tphi)));
    return c;
}

Checks calibrations() {
    Checks c;
    std::vector<double> a = linspace(0.0, PI, 41);
    fit::Cosine cos = fit::fit_cosine(a, geometric_phase_scan(a, SpaceSpec(40)), 0.05, 2.0);
    c.add(std::abs(cos.frequency * PI - 1.0) <= 0.02, fmt("geometric phase frequency %.4f vs 1/pi", cos.frequency));
    DeviceParams d;
    ChiFit cf = chi_fit(linspace(0, 10e-6, 11), d);
    c.add(std::abs(cf.slope / d.chi - 1.0) <= 0.01, fmt("chi ratio %.5f", cf.slope / d.chi));
    T1Fit tf = t1_cavity_fit(linspace(0, 500e-6, 11), d);
    c.add(std::abs(tf.t1 / d.t1_cavity - 1.0) <= 0.01, fmt("T1 ratio %.5f", tf.t1 / d.t1_cavity));
    return c;
}

Checks subplanck() {
    Checks c;
    DeviceParams d;
    std::vector<DecayClass> cls = default_classes();
    auto contrast = [&](const DecayClass& k) {
        const int n = auto_cavity_dim([&](const SpaceSpec& s) { return class_state(k, s); });
        return subplanck_after_loss(class_state(k, SpaceSpec(n)), 100e-6, d).contrast;
    };
    const double plain = contrast(cls[0]), comp = contrast(cls[3]);
    c.add(comp >= 3 * plain, fmt("-7.6 %.4f vs uncompressed %.4f (>= 3x)", comp, plain));
    return c;
}

Checks noisy_parity() {
    Checks c;
    DeviceParams d;
    CompressionSchedule sch = reference_schedule(-6);
    sch.final_v = cat_final_v(1.8, squeeze_r_from_db(-6.7));
    NoiseConfig all = NoiseConfig::from_device(d);
    all.enable_all();
    NoisyCatParity p = noisy_cat_parity(sch, d, ReadoutModel::from_device(d), all, 1);
    c.add(std::abs(p.parity_postselected + 0.6) <= 0.1,
          fmt("post-selected %.3f vs measured -0.6 +- 0.1 (ideal %.3f, exact projection %.3f)", p.parity_postselected,
              p.parity_ideal, p.parity_noisy));
    take_warnings();
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    std::string report;
    bool strict = false;
    std::string only;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--report") && i + 1 < argc) {
            report = argv[++i];
        } else if (!std::strcmp(argv[i], "--strict")) {
            strict = true;
        } else if (!std::strcmp(argv[i], "--only") && i + 1 < argc) {
            only = argv[++i];
        } else {
            std::cerr << "usage: acceptance [--report file] [--strict] [--only name]\n";
            return 64;
        }
    }
    struct Criterion {
        const char* name;
        bool primary;
        std::function<Checks()> run;
    };
    const std::vector<Criterion> all = {
        {"coefficient_table", true, coefficient_table}, {"decay_constants", true, decay_constants},
        {"parity_optimum", true, parity_optimum},       {"oracle_equivalences", true, oracle_equivalences},
        {"optimizer", true, optimizer},                 {"error_budget", true, error_budget_check},
        {"calibrations", true, calibrations},           {"subplanck_persistence", true, subplanck},
        {"noisy_cat_parity", false, noisy_parity}};
    std::vector<Line> lines;
    int reds = 0;
    std::ostringstream out;
    for (const auto& cr : all) {
        if (!only.empty() && only != cr.name) continue;
        auto t0 = Clock::now();
        Line l;
        l.name = cr.name;
        try {
            Checks c = cr.run();
            l.status = cr.primary ? (c.ok ? "PASS" : "FAIL") : "INFO";
            l.detail = c.text();
        } catch (const std::exception& e) {
            l.status = cr.primary ? "FAIL" : "INFO";
            l.detail = std::string("error: ") + e.what();
        }
        l.seconds = since(t0);
        if (l.status == "FAIL") ++reds;
        std::string text = fmt("%s %s [%.1fs] %s", l.status.c_str(), l.name.c_str(), l.seconds, l.detail.c_str());
        std::cout << text << std::endl;
        out << text << "\n";
    }
    std::string tail = fmt("%d primary criteria failed", reds);
    std::cout << tail << std::endl;
    out << tail << "\n";
    if (!report.empty()) std::ofstream(report) << out.str();
    return strict && reds > 0 ? 1 : 0;
}
