#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "catcomp/dynamics.hpp"
#include "catcomp/fit.hpp"
#include "catcomp/gates.hpp"
#include "catcomp/protocol.hpp"
#include "catcomp/tomography.hpp"

namespace catcomp {

enum class EvolveMode { filter, lindblad };

inline const char* mode_name(EvolveMode m) { return m == EvolveMode::filter ? "filter" : "lindblad"; }

inline EvolveMode parse_mode(const std::string& s) {
    if (s == "filter") return EvolveMode::filter;
    if (s == "lindblad") return EvolveMode::lindblad;
    throw std::invalid_argument("unknown mode " + s);
}

inline std::vector<double> time_axis(double t_max, int n) { return linspace(0.0, t_max, n); }

// ------------------------------------------------------------------ states of the decay experiment

// Labels: 0 is the plain odd cat; -3, -6.7, -7.6 use the -3, -6, -7 coefficient rows.
struct DecayClass {
    std::string label;
    double xi_db = 0;
    int row = 0;  // 0: no compression
};

inline std::vector<DecayClass> default_classes() {
    return {{"uncompressed", 0.0, 0}, {"-3", -3.0, -3}, {"-6.7", -6.7, -6}, {"-7.6", -7.6, -7}};
}

enum class ClassSource { protocol, ideal };

// Odd cats with gamma = 1.8: blobs at 2 gamma e^{-r}.
inline PureState class_state(const DecayClass& c, const SpaceSpec& s, ClassSource src = ClassSource::protocol,
                             double gamma = 1.8) {
    if (c.row == 0) return make_cat(gamma, -1, s);
    const double r = squeeze_r_from_db(c.xi_db);
    if (src == ClassSource::ideal) return make_squeezed_cat(gamma, r, 0.0, -1, s);
    CompressionSchedule sch = reference_schedule(c.row);
    sch.final_v = cat_final_v(gamma, r);
    return *create_compressed_cat(sch, s, QubitLabel::e).cavity_pure;
}

inline double class_blob_center(const DecayClass& c, double gamma = 1.8) {
    return 2.0 * gamma * std::exp(-squeeze_r_from_db(c.xi_db));
}

// ------------------------------------------------------------------ time evolution under loss

namespace detail {

inline DensityMatrix cavity_density(const DensityMatrix& rho) {
    return rho.factor == Factor::composite ? cavity_reduced(rho) : rho;
}

// Cavity states at each of the sorted times under cavity loss only.
inline std::vector<DensityMatrix> lindblad_series(const DensityMatrix& rho0, const std::vector<double>& times, double kappa) {
    NoiseConfig n;
    n.cavity_decay = true;
    n.kappa = kappa;
    DensityMatrix rho = cavity_density(rho0);
    Matrix h = Matrix::Zero(rho.matrix.rows(), rho.matrix.cols());
    std::vector<DensityMatrix> out;
    double t = 0;
    for (double ti : times) {
        if (ti < t) throw std::invalid_argument("lindblad_series: times must be sorted");
        if (ti > t) rho = lindblad_evolve(rho, h, n, ti - t).rho;
        t = ti;
        out.push_back(rho);
    }
    return out;
}

inline std::vector<double> real_part(const Vector& v) {
    std::vector<double> out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v(i).real();
    return out;
}

}  // namespace detail

// ------------------------------------------------------------------ blob decay

struct WindowFit {
    double window_end = 0;
    fit::Offset offset = fit::Offset::nonnegative;
    double tau = 0;
};

struct BlobSeries {
    std::string label;
    std::vector<double> times;
    std::vector<double> amplitudes;
    std::vector<double> signed_amplitudes;
    std::vector<double> centers;
    std::vector<std::string> methods;
    fit::ExpFit fit;
    fit::BootstrapStats bootstrap;
    double fit_window_end = 0;
    fit::Offset offset = fit::Offset::nonnegative;
    std::vector<WindowFit> sensitivity;
    double band_lo = 0, band_hi = 0;
    bool fit_ok = true;
    double tau() const { return fit.tau(); }
    bool in_band(double tau) const { return tau >= band_lo && tau <= band_hi; }
};

struct DecayOptions {
    EvolveMode mode = EvolveMode::filter;
    fit::Offset offset = fit::Offset::nonnegative;
    double fit_window_end = 150e-6;
    std::vector<double> sensitivity_windows{100e-6, 150e-6, 200e-6, 300e-6};
    int bootstrap = 200;
    unsigned long long seed = 1;
    double window = 0.8;
    double cut_step = 0.02;
    Interpolation interpolation = Interpolation::cubic;
};

// A exp(-t/tau) + c on the samples with t <= window_end.
inline fit::ExpFit fit_window(const std::vector<double>& t, const std::vector<double>& y, double window_end, fit::Offset mode) {
    std::vector<double> tt, yy;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] <= window_end * (1 + 1e-9)) {
            tt.push_back(t[i]);
            yy.push_back(y[i]);
        }
    if (tt.size() < 4) throw std::invalid_argument("fit_window: fewer than 4 samples in the fit window");
    return fit::fit_exponential(tt, yy, mode);
}

inline void fill_sensitivity(BlobSeries& s, const std::vector<double>& y, const DecayOptions& o) {
    s.sensitivity.clear();
    s.band_lo = std::numeric_limits<double>::infinity();
    s.band_hi = 0;
    for (double w : o.sensitivity_windows) {
        if (w > s.times.back() * (1 + 1e-9)) continue;
        for (fit::Offset m : {fit::Offset::nonnegative, fit::Offset::free, fit::Offset::none}) {
            double tau = fit_window(s.times, y, w, m).tau();
            s.sensitivity.push_back({w, m, tau});
            s.band_lo = std::min(s.band_lo, tau);
            s.band_hi = std::max(s.band_hi, tau);
        }
    }
}

// Blob amplitude of Re C on the Re axis, tracked along its loss trajectory.
inline BlobSeries decay_scan(const DensityMatrix& state, const std::vector<double>& times, const DeviceParams& device,
                             double center_guess, const DecayOptions& o = {}) {
    if (times.size() < 6) throw std::invalid_argument("decay_scan: at least 6 time points required");
    if (!std::is_sorted(times.begin(), times.end())) throw std::invalid_argument("decay_scan: times must be sorted");
    const double kappa = device.kappa();
    const double t_max = times.back();
    const double reach = center_guess * std::exp(0.5 * kappa * t_max) + 4.0;
    const int n = 2 * static_cast<int>(std::ceil(reach / o.cut_step)) + 1;
    const double ext = o.cut_step * double(n / 2);
    GridAxes ax = GridAxes::re_cut(-ext, ext, n);
    BlobSeries s;
    s.times = times;
    s.fit_window_end = o.fit_window_end;
    s.offset = o.offset;
    std::vector<Vector> cuts;
    if (o.mode == EvolveMode::filter) {
        CharGrid c0 = char_function(state, ax);
        for (double t : times) cuts.push_back(loss_filter_char(c0, kappa, t, o.interpolation).re_cut());
    } else {
        for (const auto& rho : detail::lindblad_series(state, times, kappa)) cuts.push_back(char_function(rho, ax).re_cut());
    }
    // t=0 centre: largest |Re C| near the expected position
    double x0 = center_guess;
    {
        std::vector<double> y = detail::real_part(cuts[0]);
        double best = -1;
        for (std::size_t j = 0; j < ax.re_axis.size(); ++j)
            if (std::abs(ax.re_axis[j] - center_guess) <= 0.25 && std::abs(y[j]) > best) {
                best = std::abs(y[j]);
                x0 = ax.re_axis[j];
            }
    }
    // A Gaussian blob of width w at c moves to c sqrt(eta) / (eta + (1 - eta) w^2) after loss eta.
    const BlobFit w0 = [&] {
        BlobFit b = blob_amplitude(ax.re_axis, detail::real_part(cuts[0]), x0, std::min(o.window, 0.45 * x0));
        return b;
    }();
    const int sign = w0.signed_amplitude < 0 ? -1 : 1;
    const double width0 = w0.method == "fit" ? w0.sigma : 1.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double eta = std::exp(-kappa * times[k]);
        const double guess = x0 * std::sqrt(eta) / (eta + (1.0 - eta) * width0 * width0);
        BlobFit b = blob_amplitude(ax.re_axis, detail::real_part(cuts[k]), guess, std::min(o.window, 0.45 * guess), sign);
        s.amplitudes.push_back(b.amplitude);
        s.signed_amplitudes.push_back(b.signed_amplitude);
        s.centers.push_back(b.center);
        s.methods.push_back(b.method);
    }
    if (s.amplitudes[0] < 1e-3) throw std::runtime_error("decay_scan: blob below noise floor at t=0");
    s.fit = fit_window(times, s.amplitudes, o.fit_window_end, o.offset);
    s.fit_ok = s.fit.ok;
    {
        std::vector<double> tt, yy;
        for (std::size_t i = 0; i < times.size(); ++i)
            if (times[i] <= o.fit_window_end * (1 + 1e-9)) {
                tt.push_back(times[i]);
                yy.push_back(s.amplitudes[i]);
            }
        s.bootstrap = fit::bootstrap_exponential(tt, yy, o.offset, o.bootstrap, o.seed);
    }
    fill_sensitivity(s, s.amplitudes, o);
    return s;
}

inline BlobSeries decay_scan(const PureState& state, const std::vector<double>& times, const DeviceParams& device,
                             double center_guess, const DecayOptions& o = {}) {
    return decay_scan(to_density(state), times, device, center_guess, o);
}

// ------------------------------------------------------------------ parity decay

struct ParitySeries {
    std::string label;
    std::vector<double> times;
    std::vector<double> parity;
    std::vector<double> parity_fock;
    fit::ExpFit fit;  // on parity * sign(parity(0))
    double fit_window_end = 0;
    GridAxes axes;
    double tau() const { return fit.tau(); }
};

struct ParityOptions {
    EvolveMode mode = EvolveMode::filter;
    fit::Offset offset = fit::Offset::free;
    double fit_window_end = 150e-6;
    double step = 0.07;
    double edge = 0.01;
    Interpolation interpolation = Interpolation::cubic;
};

// Rectangle whose edge |C| is below `edge`, judged from the two axis cuts and confirmed on the grid.
inline GridAxes auto_grid(const DensityMatrix& rho, double step = 0.07, double edge = 0.01) {
    auto extent = [&](bool re) {
        double lo_ok = 2.0;
        const double lim = 60.0;
        GridAxes ax = re ? GridAxes::re_cut(-lim, lim, int(2 * lim / 0.05) + 1) : GridAxes::im_cut(-lim, lim, int(2 * lim / 0.05) + 1);
        CharGrid c = char_function(rho, ax);
        Vector v = re ? c.re_cut() : c.im_cut();
        const auto& a = re ? c.re_axis : c.im_axis;
        for (Eigen::Index i = 0; i < v.size(); ++i)
            if (std::abs(v(i)) >= 0.5 * edge) lo_ok = std::max(lo_ok, std::abs(a[i]));
        return lo_ok + 0.5;
    };
    double er = extent(true), ei = extent(false);
    for (int attempt = 0; attempt < 6; ++attempt) {
        int nr = 2 * static_cast<int>(std::ceil(er / step)) + 1, ni = 2 * static_cast<int>(std::ceil(ei / step)) + 1;
        GridAxes g{linspace(-step * (nr / 2), step * (nr / 2), nr), linspace(-step * (ni / 2), step * (ni / 2), ni)};
        CharGrid c = char_function(rho, g);
        if (c.edge_magnitude() < edge) return g;
        er *= 1.25;
        ei *= 1.25;
    }
    throw std::runtime_error("auto_grid: could not cover the characteristic function");
}

inline double parity_fock(const DensityMatrix& rho) {
    DensityMatrix c = detail::cavity_density(rho);
    double p = 0;
    for (Eigen::Index k = 0; k < c.matrix.rows(); ++k) p += (k % 2 == 0 ? 1.0 : -1.0) * c.matrix(k, k).real();
    return p;
}

inline ParitySeries parity_scan(const DensityMatrix& state, const std::vector<double>& times, const DeviceParams& device,
                                const ParityOptions& o = {}) {
    if (times.size() < 6) throw std::invalid_argument("parity_scan: at least 6 time points required");
    if (!std::is_sorted(times.begin(), times.end())) throw std::invalid_argument("parity_scan: times must be sorted");
    const double kappa = device.kappa();
    ParitySeries s;
    s.times = times;
    s.fit_window_end = o.fit_window_end;
    DensityMatrix rho0 = detail::cavity_density(state);
    s.axes = auto_grid(rho0, o.step, o.edge);
    if (o.mode == EvolveMode::filter) {
        CharGrid c0 = char_function(rho0, s.axes);
        for (double t : times) {
            s.parity.push_back(parity_from_char(loss_filter_char(c0, kappa, t, o.interpolation)));
            s.parity_fock.push_back(parity_fock(amplitude_damping_fock(rho0, kappa, t)));
        }
    } else {
        for (const auto& rho : detail::lindblad_series(rho0, times, kappa)) {
            s.parity.push_back(parity_from_char(char_function(rho, s.axes)));
            s.parity_fock.push_back(parity_fock(rho));
        }
    }
    const double sign = s.parity[0] < 0 ? -1.0 : 1.0;
    std::vector<double> y;
    for (double p : s.parity) y.push_back(sign * p);
    s.fit = fit_window(times, y, o.fit_window_end, o.offset);
    return s;
}

inline ParitySeries parity_scan(const PureState& state, const std::vector<double>& times, const DeviceParams& device,
                                const ParityOptions& o = {}) {
    return parity_scan(to_density(state), times, device, o);
}

// Momentum marginal of the state after loss for time t, from a Re-axis cut of half-width `extent`.
inline Marginal subplanck_after_loss(const DensityMatrix& state, double t, const DeviceParams& device,
                                     EvolveMode mode = EvolveMode::filter, double extent = 12.0, int n = 1201) {
    GridAxes ax = GridAxes::re_cut(-extent, extent, n);
    DensityMatrix rho0 = detail::cavity_density(state);
    if (mode == EvolveMode::filter) return subplanck_marginal(loss_filter_char(char_function(rho0, ax), device.kappa(), t));
    return subplanck_marginal(char_function(detail::lindblad_series(rho0, {t}, device.kappa()).back(), ax));
}

inline Marginal subplanck_after_loss(const PureState& state, double t, const DeviceParams& device,
                                     EvolveMode mode = EvolveMode::filter, double extent = 12.0, int n = 1201) {
    return subplanck_after_loss(to_density(state), t, device, mode, extent, n);
}

// ------------------------------------------------------------------ compression sweep

struct SweepLevel {
    double level_db = 0;
    int cavity_dim = 0;
    double blob_center = 0;
    BlobSeries blob;
    ParitySeries parity;
};

struct SweepResult {
    std::vector<SweepLevel> levels;
    bool blob_monotone = false;
    int parity_peak_index = -1;
    bool parity_peak_interior = false;
};

// Smallest cavity dimension (step 20) whose top 10% of levels carries < tol weight.
inline int auto_cavity_dim(const std::function<PureState(const SpaceSpec&)>& make, int start = 60, int max_dim = 200,
                           double tol = 1e-10) {
    for (int n = start; n <= max_dim; n += 20) {
        PureState p = make(SpaceSpec(n));
        const int tail = std::max(1, n / 10);
        if (p.amplitudes.tail(tail).squaredNorm() < tol) return n;
    }
    throw std::runtime_error("auto_cavity_dim: no dimension up to max_dim holds the state");
}

inline SweepResult compression_sweep(const std::vector<double>& levels_db, double gamma, const std::vector<double>& times,
                                     const DeviceParams& device, const DecayOptions& dopt = {}, const ParityOptions& popt = {}) {
    SweepResult out;
    for (double db : levels_db) {
        const double r = squeeze_r_from_db(db);
        auto make = [&](const SpaceSpec& s) { return make_squeezed_cat(gamma, r, 0.0, -1, s); };
        SweepLevel lv;
        lv.level_db = db;
        lv.cavity_dim = auto_cavity_dim(make);
        PureState st = make(SpaceSpec(lv.cavity_dim));
        lv.blob_center = 2.0 * gamma * std::exp(-r);
        lv.blob = decay_scan(st, times, device, lv.blob_center, dopt);
        lv.parity = parity_scan(st, times, device, popt);
        lv.blob.label = lv.parity.label = std::to_string(db);
        out.levels.push_back(std::move(lv));
    }
    // order by compression strength
    std::vector<std::size_t> idx(out.levels.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return out.levels[a].level_db > out.levels[b].level_db; });
    out.blob_monotone = true;
    for (std::size_t k = 1; k < idx.size(); ++k)
        if (!(out.levels[idx[k]].blob.tau() > out.levels[idx[k - 1]].blob.tau())) out.blob_monotone = false;
    std::size_t pk = 0;
    for (std::size_t k = 1; k < idx.size(); ++k)
        if (out.levels[idx[k]].parity.tau() > out.levels[idx[pk]].parity.tau()) pk = k;
    out.parity_peak_index = static_cast<int>(idx[pk]);
    out.parity_peak_interior = pk > 0 && pk + 1 < idx.size();
    return out;
}

// ------------------------------------------------------------------ error budget

struct BudgetRow {
    std::string channel;
    double infidelity = 0;
};

struct BudgetOptions {
    double u = 1.0;
    QubitDephasing qubit_convention = QubitDephasing::t2e;
    CavityDephasing cavity_convention = CavityDephasing::coherence_time;
    int cavity_dim = 30;
};

// 1 - <ideal|rho|ideal> for U(u) on |g>|0>, ideal = exp(i u P sigma_x)|g>|0>.
inline double u_gate_infidelity(const DeviceParams& d, const NoiseConfig& noise, const BudgetOptions& o) {
    SpaceSpec s(o.cavity_dim);
    PureState vac = make_vacuum(s);
    PureState in = tensor(make_qubit(QubitLabel::g, s), vac);
    PureState ideal{uv_exponential(UV::U, o.u, s).matrix * in.amplitudes, s, Factor::composite};
    DensityMatrix rho0 = noise.thermal ? with_thermal_qubit(vac, noise.thermal_population) : to_density(in);
    DensityMatrix rho = lindblad_evolve(rho0, uv_gate_program(UV::U, o.u, d, noise, s)).rho;
    return 1.0 - state_fidelity(ideal, rho);
}

inline std::vector<BudgetRow> error_budget(const DeviceParams& d, const BudgetOptions& o = {}) {
    NoiseConfig base = NoiseConfig::from_device(d, o.qubit_convention, o.cavity_convention);
    std::vector<BudgetRow> rows;
    for (const char* ch : {"qubit_dephasing", "qubit_decay", "cavity_dephasing", "cavity_decay", "thermal"})
        rows.push_back({ch, u_gate_infidelity(d, base.only(ch), o)});
    rows.push_back({"readout_g", 1.0 - d.readout_p_gg});
    rows.push_back({"readout_e", 1.0 - d.readout_p_ee});
    return rows;
}

inline double vacuum_contrast_estimate(const DeviceParams& d, const BudgetOptions& o = {}) {
    NoiseConfig all = NoiseConfig::from_device(d, o.qubit_convention, o.cavity_convention);
    all.enable_all();
    const double f = 1.0 - u_gate_infidelity(d, all, o);
    return f * 0.5 * (d.readout_p_gg + d.readout_p_ee);
}

// ------------------------------------------------------------------ calibrations

struct ChiFit {
    double slope = 0;            // rad/s, relative e-vs-g rotation: equals chi
    double per_branch_slope = 0;  // rad/s, one branch against the bare frame: chi/2
    std::vector<double> delta_ts;
    std::vector<double> angles;
};

inline ChiFit chi_fit(const std::vector<double>& delta_ts, const DeviceParams& d, cplx probe = 2.0, int cavity_dim = 40) {
    if (delta_ts.size() < 2) throw std::invalid_argument("chi_fit: need >= 2 times");
    SpaceSpec s(cavity_dim);
    PureState c = make_coherent(probe, s);
    Operator a = make_operator(OpKind::annihilate, {}, s);
    ChiFit out;
    out.delta_ts = delta_ts;
    std::vector<double> rel, branch;
    double prev = 0, prev_b = 0;
    for (std::size_t i = 0; i < delta_ts.size(); ++i) {
        cplx ae = expectation(dispersive_rotation(c, delta_ts[i], d, QubitLabel::e), a);
        cplx ag = expectation(dispersive_rotation(c, delta_ts[i], d, QubitLabel::g), a);
        double th = std::arg(ae / ag), tb = std::arg(ae / probe);
        if (i > 0) {
            while (th - prev > PI) th -= 2 * PI;
            while (th - prev < -PI) th += 2 * PI;
            while (tb - prev_b > PI) tb -= 2 * PI;
            while (tb - prev_b < -PI) tb += 2 * PI;
        }
        prev = th;
        prev_b = tb;
        rel.push_back(th);
        branch.push_back(tb);
    }
    out.angles = rel;
    out.slope = fit::fit_line(delta_ts, rel).slope;
    out.per_branch_slope = fit::fit_line(delta_ts, branch).slope;
    return out;
}

struct T1Fit {
    double t1 = 0;
    double kappa = 0;
    bool unbounded = false;
    std::vector<double> times;
    std::vector<double> mean_n;
};

// <n>(t) under amplitude damping of coherent(probe), fitted as log-linear decay.
inline T1Fit t1_cavity_fit(const std::vector<double>& times, const DeviceParams& d, cplx probe = 2.0, int cavity_dim = 40) {
    if (times.size() < 2) throw std::invalid_argument("t1_cavity_fit: need >= 2 times");
    SpaceSpec s(cavity_dim);
    DensityMatrix rho = to_density(make_coherent(probe, s));
    Operator n = make_operator(OpKind::number, {}, s);
    T1Fit out;
    out.times = times;
    std::vector<double> logn;
    for (double t : times) {
        double m = expectation(amplitude_damping_fock(rho, d.kappa(), t), n).real();
        out.mean_n.push_back(m);
        logn.push_back(std::log(m));
    }
    out.kappa = -fit::fit_line(times, logn).slope;
    out.unbounded = !(out.kappa > 1e-12 * std::max(1.0, 1.0 / times.back()));
    out.t1 = out.unbounded ? std::numeric_limits<double>::infinity() : 1.0 / out.kappa;
    return out;
}

// ------------------------------------------------------------------ readout

struct ReadoutModel {
    double p_gg = 0.986;
    double p_ee = 0.95;
    int shots = 1000;

    static ReadoutModel from_device(const DeviceParams& d, int shots = 1000) { return {d.readout_p_gg, d.readout_p_ee, shots}; }
    void validate() const {
        if (p_gg < 0 || p_gg > 1 || p_ee < 0 || p_ee > 1) throw std::invalid_argument("ReadoutModel: probabilities outside [0,1]");
        if (shots < 0) throw std::invalid_argument("ReadoutModel: shots must be >= 0");
    }
    // Probabilities of reading (g, e) given true populations.
    std::pair<double, double> measured(double pg, double pe) const {
        return {p_gg * pg + (1 - p_ee) * pe, (1 - p_gg) * pg + p_ee * pe};
    }
};

struct NoisyCatParity {
    double parity_ideal = 0;       // noiseless protocol, exact projection
    double parity_noisy = 0;       // full noise, exact projection on e
    double parity_postselected = 0;  // full noise, post-selected on reading e
    double parity_sampled = 0;     // with binomial shot noise
    double shot_error = 0;
    double p_read_e = 0;
};

inline NoisyCatParity noisy_cat_parity(const CompressionSchedule& schedule, const DeviceParams& d, const ReadoutModel& ro,
                                       const NoiseConfig& noise, unsigned long long seed, int cavity_dim = 40) {
    ro.validate();
    SpaceSpec s(cavity_dim);
    NoisyCatParity out;
    out.parity_ideal = parity_fock(create_compressed_cat(schedule, s, QubitLabel::e).cavity_state);
    ProtocolOptions po;
    po.device = d;
    DensityMatrix rho = detail::noisy_run(schedule, true, s, noise, po, make_vacuum(s));
    Matrix pe = ops::embed_qubit(ops::projector(1), s), pg = ops::embed_qubit(ops::projector(0), s);
    const double p_e = (pe * rho.matrix).trace().real(), p_g = (pg * rho.matrix).trace().real();
    DensityMatrix odd = cavity_reduced(DensityMatrix{pe * rho.matrix * pe / p_e, s, Factor::composite});
    DensityMatrix even = cavity_reduced(DensityMatrix{pg * rho.matrix * pg / p_g, s, Factor::composite});
    const double par_odd = parity_fock(odd), par_even = parity_fock(even);
    out.parity_noisy = par_odd;
    const double w_e = ro.p_ee * p_e, w_g = (1 - ro.p_gg) * p_g;
    out.p_read_e = w_e + w_g;
    out.parity_postselected = (w_e * par_odd + w_g * par_even) / (w_e + w_g);
    out.parity_sampled = out.parity_postselected;
    if (ro.shots > 0) {
        std::mt19937_64 rng(seed);
        std::binomial_distribution<int> b(ro.shots, 0.5 * (1 + out.parity_postselected));
        out.parity_sampled = 2.0 * b(rng) / double(ro.shots) - 1.0;
        out.shot_error = std::sqrt(std::max(0.0, 1 - out.parity_postselected * out.parity_postselected) / ro.shots);
    }
    return out;
}

}  // namespace catcomp
