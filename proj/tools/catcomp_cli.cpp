#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include "catcomp/catcomp.hpp"

using namespace catcomp;
using io::Json;

namespace {

struct Flags {
    std::string config;
    std::string out = "out";
    unsigned long long seed = 1;
    std::string mode = "filter";
    std::string grid;
    int shots = 1000;
};

// Resolved inputs of one run: user config merged over the subcommand's defaults.
struct Run {
    std::string command;
    Flags flags;
    Json params;
    DeviceParams device;
    io::ScheduleDocument schedule;
    bool has_schedule = false;
    std::optional<GridAxes> grid;
    io::RunDirectory dir{"out"};
    Json summary = Json::object();
    bool fit_failed = false;
    std::vector<std::string> failures;

    double num(const char* k) const { return params.at(k).get<double>(); }
    int integer(const char* k) const { return params.at(k).get<int>(); }
    std::string str(const char* k) const { return params.at(k).get<std::string>(); }
    EvolveMode mode() const { return parse_mode(flags.mode); }

    void fail(const std::string& why) {
        fit_failed = true;
        failures.push_back(why);
    }
};

GridAxes parse_grid(const std::string& g) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : g) {
        if (c == ':') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    if (parts.size() != 3) throw std::invalid_argument("--grid expects min:max:n");
    const double lo = std::stod(parts[0]), hi = std::stod(parts[1]);
    const int n = std::stoi(parts[2]);
    if (!(hi > lo) || n < 3) throw std::invalid_argument("--grid needs max > min and n >= 3");
    return GridAxes::square(lo, hi, n);
}

void load(Run& run, const Json& defaults) {
    run.params = defaults;
    Json cfg = run.flags.config.empty() ? Json::object() : io::read_json(run.flags.config);
    if (!cfg.is_object()) throw std::runtime_error("config: expected a JSON object");
    for (const auto& [k, v] : cfg.items()) {
        if (k == "device") {
            run.device = io::device_from_json(v);
        } else if (k == "schedule") {
            run.schedule = io::schedule_from_json(v);
            run.has_schedule = true;
        } else if (defaults.contains(k)) {
            run.params[k] = v;
        } else {
            throw std::runtime_error("config: key '" + k + "' is not used by '" + run.command + "'");
        }
    }
    parse_mode(run.flags.mode);
    if (!run.flags.grid.empty()) run.grid = parse_grid(run.flags.grid);
    if (run.flags.shots < 0) throw std::invalid_argument("--shots must be >= 0");
    run.dir = io::RunDirectory(run.flags.out);
}

Json resolved_config(const Run& run) {
    Json c = run.params;
    c["command"] = run.command;
    c["device"] = io::to_json(run.device);
    c["seed"] = run.flags.seed;
    c["mode"] = run.flags.mode;
    c["shots"] = run.flags.shots;
    c["grid"] = run.flags.grid.empty() ? Json(nullptr) : Json(run.flags.grid);
    if (run.has_schedule) c["schedule"] = io::to_json(run.schedule);
    return c;
}

GridAxes grid_or(const Run& run, double lo, double hi, int n) { return run.grid ? *run.grid : GridAxes::square(lo, hi, n); }

// ------------------------------------------------------------------ state selection

PureState select_state(const Json& st, const SpaceSpec& s) {
    const std::string kind = st.value("kind", "cat");
    const double r = st.contains("db") ? squeeze_r_from_db(st.at("db").get<double>()) : st.value("r", 0.0);
    if (kind == "vacuum") return make_vacuum(s);
    if (kind == "coherent") return make_coherent(st.value("alpha", 1.8), s);
    if (kind == "cat") return make_cat(st.value("alpha", 1.8), st.value("parity", -1), s);
    if (kind == "squeezed_vacuum") return make_squeezed_vacuum(r, st.value("theta", 0.0), s);
    if (kind == "squeezed_cat")
        return make_squeezed_cat(st.value("gamma", 1.8), r, st.value("theta", 0.0), st.value("parity", -1), s);
    if (kind == "class") {
        const std::string label = st.value("label", "-6.7");
        for (const auto& c : default_classes())
            if (c.label == label) return class_state(c, s, st.value("source", "protocol") == "ideal" ? ClassSource::ideal : ClassSource::protocol);
        throw std::runtime_error("state: unknown class '" + label + "'");
    }
    throw std::runtime_error("state: unknown kind '" + kind + "'");
}

DecayClass find_class(const std::string& label) {
    for (const auto& c : default_classes())
        if (c.label == label) return c;
    throw std::runtime_error("unknown decay class '" + label + "'");
}

std::vector<double> times_of(const Run& run) {
    return time_axis(run.num("t_max_us") * 1e-6, run.integer("n_times"));
}

fit::Offset parse_offset(const std::string& s) {
    for (fit::Offset o : {fit::Offset::nonnegative, fit::Offset::free, fit::Offset::none})
        if (s == fit::offset_name(o)) return o;
    throw std::invalid_argument("unknown offset mode '" + s + "'");
}

Json parity_or_null(const CharGrid& g) {
    try {
        return parity_from_char(g);
    } catch (const std::invalid_argument& e) {
        warn(e.what());
        return nullptr;
    }
}

Json exp_fit_json(const fit::ExpFit& f) {
    return {{"amplitude", f.amplitude}, {"rate", f.rate}, {"tau", f.tau()}, {"offset", f.offset}, {"rss", f.rss}, {"ok", f.ok}};
}

Json compression_json(const CompressionMeasurement& m) {
    return {{"db", m.db},
            {"sigma", m.sigma},
            {"sigma_vac", m.sigma_vac},
            {"relative_residual", m.relative_residual},
            {"non_gaussian", m.non_gaussian}};
}

// ------------------------------------------------------------------ subcommands

void cmd_compress(Run& run) {
    load(run, {{"row", -6}, {"cavity_dim", 60}, {"noise", false}, {"frame_rotation", -PI / 2}});
    CompressionSchedule sch = run.has_schedule ? run.schedule.schedule : reference_schedule(run.integer("row"));
    sch.final_v.reset();
    SpaceSpec s(run.integer("cavity_dim"));
    ProtocolOptions po;
    po.device = run.device;
    po.frame_rotation = run.num("frame_rotation");
    std::optional<NoiseConfig> noise;
    if (run.params.at("noise").get<bool>()) noise = NoiseConfig::from_device(run.device).enable_all();
    ProtocolResult res = run_compression(sch, s, noise, po);

    GridAxes cut_x = GridAxes::re_cut(-6, 6, 601), cut_p = GridAxes::im_cut(-6, 6, 601);
    CharGrid cx = char_function(res.cavity_state, cut_x), cp = char_function(res.cavity_state, cut_p);
    io::Table t{{"nu", "re_C_x", "im_C_x", "re_C_p", "im_C_p"}, {}};
    Vector vx = cx.re_cut(), vp = cp.im_cut();
    for (std::size_t i = 0; i < cut_x.re_axis.size(); ++i)
        t.add_row({cut_x.re_axis[i], vx(i).real(), vx(i).imag(), vp(i).real(), vp(i).imag()});
    run.dir.csv("series.csv", t);
    run.dir.grid("charfun", char_function(res.cavity_state, grid_or(run, -7, 7, 201), "compressed_vacuum"));

    Json m = Json::object();
    for (auto [name, q, g] : {std::tuple{"x", Quadrature::X, &cx}, std::tuple{"p", Quadrature::P, &cp}}) {
        try {
            m[name] = compression_json(measure_compression_db(*g, q));
        } catch (const std::runtime_error& e) {
            run.fail(std::string("compression fit (") + name + "): " + e.what());
        }
    }
    run.summary["compression_fit"] = m;
    run.summary["variance_db"] = {{"x", quadrature_db(res.cavity_state, true)}, {"p", quadrature_db(res.cavity_state, false)}};
    run.summary["fidelity_to_squeezed_vacuum"] =
        state_fidelity(make_squeezed_vacuum(squeeze_r_from_db(sch.target_db), 0.0, s), res.cavity_state);
    run.summary["target_db"] = sch.target_db;
    run.summary["elapsed_model_time"] = res.elapsed_model_time;
}

void cmd_cat(Run& run) {
    load(run, {{"row", -6}, {"xi_db", -6.7}, {"gamma", 1.8}, {"outcome", "e"}, {"cavity_dim", 60}, {"noise", false},
               {"final_v", nullptr}});
    CompressionSchedule sch = run.has_schedule ? run.schedule.schedule : reference_schedule(run.integer("row"));
    const double r = squeeze_r_from_db(run.num("xi_db")), gamma = run.num("gamma");
    if (!run.params.at("final_v").is_null()) sch.final_v = run.num("final_v");
    if (!sch.final_v) sch.final_v = cat_final_v(gamma, r);
    const std::string oc = run.str("outcome");
    if (oc != "g" && oc != "e") throw std::invalid_argument("outcome must be g or e");
    SpaceSpec s(run.integer("cavity_dim"));
    ProtocolResult res = create_compressed_cat(sch, s, oc == "e" ? QubitLabel::e : QubitLabel::g);
    CharGrid g = char_function(res.cavity_state, grid_or(run, -7, 7, 201), "compressed_cat");
    run.dir.grid("charfun", g);
    Vector cut = g.re_cut();
    io::Table t{{"re_nu", "re_C", "im_C"}, {}};
    for (std::size_t i = 0; i < g.re_axis.size(); ++i) t.add_row({g.re_axis[i], cut(i).real(), cut(i).imag()});
    run.dir.csv("series.csv", t);
    const int sign = oc == "e" ? -1 : 1;
    run.summary["final_v"] = *sch.final_v;
    run.summary["outcome"] = oc;
    run.summary["outcome_probability"] = res.outcome_probability;
    run.summary["parity_fock"] = parity_fock(res.cavity_state);
    run.summary["parity_char"] = parity_or_null(g);
    run.summary["fidelity_to_squeezed_cat"] = state_fidelity(make_squeezed_cat(gamma, r, 0.0, sign, s), res.cavity_state);
    if (run.params.at("noise").get<bool>()) {
        ReadoutModel ro = ReadoutModel::from_device(run.device, run.flags.shots);
        NoiseConfig nz = NoiseConfig::from_device(run.device).enable_all();
        NoisyCatParity np = noisy_cat_parity(sch, run.device, ro, nz, run.flags.seed, run.integer("cavity_dim"));
        run.summary["noisy"] = {{"parity_ideal", np.parity_ideal},
                                {"parity_noisy", np.parity_noisy},
                                {"parity_postselected", np.parity_postselected},
                                {"parity_sampled", np.parity_sampled},
                                {"shot_error", np.shot_error},
                                {"p_read_e", np.p_read_e},
                                {"shots", ro.shots}};
    }
}

CharGrid state_grid(Run& run, const char* label) {
    SpaceSpec s(run.integer("cavity_dim"));
    PureState st = select_state(run.params.at("state"), s);
    const double t = run.num("time_us") * 1e-6;
    GridAxes ax = grid_or(run, -7, 7, 201);
    CharGrid g;
    if (t == 0.0) {
        g = char_function(st, ax, label);
    } else if (run.mode() == EvolveMode::filter) {
        g = loss_filter_char(char_function(st, ax, label), run.device.kappa(), t);
    } else {
        g = char_function(detail::lindblad_series(to_density(st), {t}, run.device.kappa()).back(), ax, label);
    }
    g.label = label;
    g.time = t;
    return g;
}

const Json state_defaults = {{"kind", "cat"}, {"alpha", 1.8}, {"parity", -1}};

void cmd_charfun(Run& run) {
    load(run, {{"state", state_defaults}, {"cavity_dim", 60}, {"time_us", 0.0}});
    CharGrid g = state_grid(run, "charfun");
    run.dir.grid("charfun", g);
    Vector cut = g.re_cut();
    io::Table t{{"re_nu", "re_C", "im_C"}, {}};
    for (std::size_t i = 0; i < g.re_axis.size(); ++i) t.add_row({g.re_axis[i], cut(i).real(), cut(i).imag()});
    run.dir.csv("series.csv", t);
    run.summary["parity_char"] = parity_or_null(g);
    run.summary["edge_magnitude"] = g.edge_magnitude();
    run.summary["hermitian_defect"] = g.hermitian_defect();
}

void cmd_wigner(Run& run) {
    load(run, {{"state", state_defaults}, {"cavity_dim", 60}, {"time_us", 0.0}, {"pad_factor", 4}});
    CharGrid g = state_grid(run, "charfun");
    WignerGrid w = wigner_from_char(g, run.integer("pad_factor"));
    w.label = "wigner";
    run.dir.grid("charfun", g);
    run.dir.grid("wigner", w);
    Marginal m = subplanck_marginal(g, run.integer("pad_factor"));
    io::Table t{{"p", "marginal", "vacuum"}, {}};
    for (std::size_t i = 0; i < m.p_axis.size(); ++i) t.add_row({m.p_axis[i], m.values[i], m.vacuum_values[i]});
    run.dir.csv("series.csv", t);
    run.summary["parity_char"] = parity_or_null(g);
    run.summary["parity_wigner"] = parity_from_wigner(w);
    run.summary["wigner_integral"] = w.integral();
    run.summary["imag_residue"] = w.imag_residue;
    run.summary["fringe_contrast"] = m.contrast;
}

const Json class_defaults = Json::array({"uncompressed", "-3", "-6.7", "-7.6"});

void cmd_decay(Run& run) {
    load(run, {{"classes", class_defaults},
               {"source", "protocol"},
               {"cavity_dim", 60},
               {"t_max_us", 300.0},
               {"n_times", 31},
               {"fit_window_us", 150.0},
               {"offset", "nonnegative"},
               {"bootstrap", 200},
               {"subplanck_time_us", 100.0},
               {"reference_tau_us", {{"uncompressed", 42.0}, {"-3", 87.0}, {"-6.7", 145.0}, {"-7.6", 147.0}}}});
    SpaceSpec s(run.integer("cavity_dim"));
    const auto times = times_of(run);
    DecayOptions o;
    o.mode = run.mode();
    o.offset = parse_offset(run.str("offset"));
    o.fit_window_end = run.num("fit_window_us") * 1e-6;
    o.bootstrap = run.integer("bootstrap");
    o.seed = run.flags.seed;
    const ClassSource src = run.str("source") == "ideal" ? ClassSource::ideal : ClassSource::protocol;
    io::Table t{{"xi_db", "t", "amplitude", "signed_amplitude", "center"}, {}};
    io::Table mt{{"xi_db", "p", "marginal"}, {}};
    Json classes = Json::array();
    for (const auto& label : run.params.at("classes")) {
        DecayClass c = find_class(label.get<std::string>());
        PureState st = class_state(c, s, src);
        BlobSeries b = decay_scan(st, times, run.device, class_blob_center(c), o);
        for (std::size_t k = 0; k < times.size(); ++k) t.add_row({c.xi_db, times[k], b.amplitudes[k], b.signed_amplitudes[k], b.centers[k]});
        Marginal m0 = subplanck_after_loss(st, 0.0, run.device, o.mode);
        Marginal m1 = subplanck_after_loss(st, run.num("subplanck_time_us") * 1e-6, run.device, o.mode);
        for (std::size_t i = 0; i < m1.p_axis.size(); ++i) mt.add_row({c.xi_db, m1.p_axis[i], m1.values[i]});
        std::map<std::string, int> methods;
        for (const auto& m : b.methods) ++methods[m];
        Json sens = Json::array();
        for (const auto& w : b.sensitivity) sens.push_back({{"window_end", w.window_end}, {"offset", fit::offset_name(w.offset)}, {"tau", w.tau}});
        Json entry = {{"label", c.label},
                      {"xi_db", c.xi_db},
                      {"coefficient_row", c.row},
                      {"fit", exp_fit_json(b.fit)},
                      {"tau_us", b.tau() * 1e6},
                      {"se_tau_us", b.bootstrap.se_tau * 1e6},
                      {"bootstrap_resamples", b.bootstrap.resamples},
                      {"band_us", {b.band_lo * 1e6, b.band_hi * 1e6}},
                      {"sensitivity", sens},
                      {"methods", methods},
                      {"subplanck_contrast", {{"t0", m0.contrast}, {"t", m1.contrast}}}};
        const Json& refs = run.params.at("reference_tau_us");
        if (refs.contains(c.label)) {
            const double p = refs.at(c.label).get<double>();
            entry["reference_tau_us"] = p;
            entry["reference_in_band"] = b.in_band(p * 1e-6);
        }
        if (!b.fit_ok) run.fail("decay fit for class " + c.label + " hit the rate-grid edge");
        classes.push_back(entry);
    }
    run.dir.csv("series.csv", t);
    run.dir.csv("marginals.csv", mt);
    run.summary["classes"] = classes;
    run.summary["fit_window_us"] = run.num("fit_window_us");
    run.summary["offset"] = run.str("offset");
}

void cmd_parity(Run& run) {
    load(run, {{"classes", class_defaults},
               {"source", "protocol"},
               {"cavity_dim", 60},
               {"t_max_us", 300.0},
               {"n_times", 16},
               {"fit_window_us", 150.0},
               {"offset", "free"}});
    SpaceSpec s(run.integer("cavity_dim"));
    const auto times = times_of(run);
    ParityOptions o;
    o.mode = run.mode();
    o.offset = parse_offset(run.str("offset"));
    o.fit_window_end = run.num("fit_window_us") * 1e-6;
    const ClassSource src = run.str("source") == "ideal" ? ClassSource::ideal : ClassSource::protocol;
    io::Table t{{"xi_db", "t", "parity", "parity_fock"}, {}};
    Json classes = Json::array();
    for (const auto& label : run.params.at("classes")) {
        DecayClass c = find_class(label.get<std::string>());
        ParitySeries p = parity_scan(class_state(c, s, src), times, run.device, o);
        for (std::size_t k = 0; k < times.size(); ++k) t.add_row({c.xi_db, times[k], p.parity[k], p.parity_fock[k]});
        if (!p.fit.ok) run.fail("parity fit for class " + c.label + " hit the rate-grid edge");
        classes.push_back({{"label", c.label}, {"xi_db", c.xi_db}, {"fit", exp_fit_json(p.fit)}, {"tau_us", p.tau() * 1e6},
                           {"grid", {{"n_re", p.axes.re_axis.size()}, {"n_im", p.axes.im_axis.size()}}}});
    }
    run.dir.csv("series.csv", t);
    run.summary["classes"] = classes;
}

void cmd_sweep(Run& run) {
    load(run, {{"levels", {0.0, -3.0, -6.0, -9.0, -12.0}}, {"gamma", 1.8}, {"t_max_us", 300.0}, {"n_times", 31}, {"bootstrap", 0}});
    DecayOptions d;
    d.mode = run.mode();
    d.bootstrap = run.integer("bootstrap");
    d.seed = run.flags.seed;
    ParityOptions p;
    p.mode = run.mode();
    SweepResult sw = compression_sweep(run.params.at("levels").get<std::vector<double>>(), run.num("gamma"), times_of(run), run.device, d, p);
    io::Table t{{"level_db", "t", "blob", "parity", "parity_fock"}, {}};
    Json levels = Json::array();
    for (const auto& lv : sw.levels) {
        for (std::size_t k = 0; k < lv.blob.times.size(); ++k)
            t.add_row({lv.level_db, lv.blob.times[k], lv.blob.amplitudes[k], lv.parity.parity[k], lv.parity.parity_fock[k]});
        levels.push_back({{"level_db", lv.level_db},
                          {"cavity_dim", lv.cavity_dim},
                          {"blob_tau_us", lv.blob.tau() * 1e6},
                          {"parity_tau_us", lv.parity.tau() * 1e6}});
        if (!lv.blob.fit.ok || !lv.parity.fit.ok) run.fail("sweep fit at level " + io::format_double(lv.level_db) + " dB hit the rate-grid edge");
    }
    run.dir.csv("series.csv", t);
    run.summary["levels"] = levels;
    run.summary["blob_monotone"] = sw.blob_monotone;
    run.summary["parity_peak_level_db"] = sw.levels[sw.parity_peak_index].level_db;
    run.summary["parity_peak_interior"] = sw.parity_peak_interior;
}

QubitDephasing parse_qubit_convention(const std::string& s) {
    if (s == "half_tphi") return QubitDephasing::half_tphi;
    if (s == "tphi") return QubitDephasing::tphi;
    if (s == "t2e") return QubitDephasing::t2e;
    throw std::invalid_argument("unknown qubit dephasing convention '" + s + "'");
}

CavityDephasing parse_cavity_convention(const std::string& s) {
    if (s == "half_tphi") return CavityDephasing::half_tphi;
    if (s == "coherence_time") return CavityDephasing::coherence_time;
    throw std::invalid_argument("unknown cavity dephasing convention '" + s + "'");
}

void cmd_budget(Run& run) {
    load(run, {{"u", 1.0}, {"cavity_dim", 30}, {"qubit_convention", "t2e"}, {"cavity_convention", "coherence_time"}});
    BudgetOptions o;
    o.u = run.num("u");
    o.cavity_dim = run.integer("cavity_dim");
    o.qubit_convention = parse_qubit_convention(run.str("qubit_convention"));
    o.cavity_convention = parse_cavity_convention(run.str("cavity_convention"));
    const std::map<std::string, double> refs = {{"qubit_dephasing", 0.04}, {"qubit_decay", 0.02}, {"cavity_dephasing", 0.01},
                                                 {"cavity_decay", 1e-4}, {"readout_g", 0.014}, {"readout_e", 0.05}};
    io::Table t{{"row", "infidelity", "reference"}, {}};
    Json rows = Json::array();
    int k = 0;
    for (const auto& r : error_budget(run.device, o)) {
        auto it = refs.find(r.channel);
        const double pv = it == refs.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
        t.add_row({double(k++), r.infidelity, pv});
        rows.push_back({{"channel", r.channel}, {"infidelity", r.infidelity}, {"reference", it == refs.end() ? Json(nullptr) : Json(pv)}});
    }
    run.dir.csv("series.csv", t);
    run.summary["rows"] = rows;
    run.summary["vacuum_contrast"] = vacuum_contrast_estimate(run.device, o);
    run.summary["u_gate_duration"] = uv_gate_duration(o.u, run.device);
}

void cmd_optimize(Run& run) {
    load(run, {{"variant", "compress-then-displace"},
               {"target_db", -3.0},
               {"n_steps", 3},
               {"bounds", 2.5},
               {"start_range", 2.5},
               {"restarts", 48},
               {"max_evals", 4000},
               {"cat_alpha", 1.8},
               {"cavity_dim", 50}});
    OptimizeSpec sp;
    sp.variant = parse_variant(run.str("variant"));
    sp.target_db = run.num("target_db");
    sp.n_steps = run.integer("n_steps");
    sp.bounds = run.num("bounds");
    sp.start_range = run.num("start_range");
    sp.restarts = run.integer("restarts");
    sp.max_evals = run.integer("max_evals");
    sp.cat_alpha = run.num("cat_alpha");
    sp.cavity_dim = run.integer("cavity_dim");
    sp.seed = run.flags.seed;
    OptimizeResult r = optimize_schedule(sp);
    io::ScheduleDocument doc{r.schedule, r.seed, r.overlap};
    run.dir.json("schedule.json", io::to_json(doc));
    io::Table t{{"restart", "overlap"}, {}};
    for (std::size_t i = 0; i < r.restart_overlaps.size(); ++i) t.add_row({double(i), r.restart_overlaps[i]});
    run.dir.csv("series.csv", t);
    run.summary["achieved_overlap"] = r.overlap;
    run.summary["best_restart"] = r.best_restart;
    run.summary["evaluations"] = r.evals;
    run.summary["failed"] = r.failed;
    if (r.failed) run.fail("optimizer best overlap below 0.95");
}

void cmd_calibrate(Run& run) {
    load(run, {{"chi_t_max_us", 10.0}, {"t1_t_max_us", 500.0}, {"n_times", 11}, {"probe", 2.0}, {"cavity_dim", 40},
               {"phase_points", 41}, {"phase_alpha_max", PI}});
    const int n = run.integer("n_times");
    ChiFit cf = chi_fit(linspace(0, run.num("chi_t_max_us") * 1e-6, n), run.device, run.num("probe"), run.integer("cavity_dim"));
    T1Fit tf = t1_cavity_fit(linspace(0, run.num("t1_t_max_us") * 1e-6, n), run.device, run.num("probe"), run.integer("cavity_dim"));
    std::vector<double> alphas = linspace(0, run.num("phase_alpha_max"), run.integer("phase_points"));
    std::vector<double> sx = geometric_phase_scan(alphas, SpaceSpec(run.integer("cavity_dim")));
    fit::Cosine cos = fit::fit_cosine(alphas, sx, 0.05, 2.0);
    io::Table g{{"alpha", "sigma_x"}, {}}, c{{"dt", "angle"}, {}}, t1{{"t", "mean_n"}, {}};
    for (std::size_t i = 0; i < alphas.size(); ++i) g.add_row({alphas[i], sx[i]});
    for (std::size_t i = 0; i < cf.delta_ts.size(); ++i) c.add_row({cf.delta_ts[i], cf.angles[i]});
    for (std::size_t i = 0; i < tf.times.size(); ++i) t1.add_row({tf.times[i], tf.mean_n[i]});
    run.dir.csv("series.csv", g);
    run.dir.csv("chi.csv", c);
    run.dir.csv("t1.csv", t1);
    run.summary["chi"] = {{"slope", cf.slope}, {"per_branch_slope", cf.per_branch_slope}, {"programmed", run.device.chi},
                          {"ratio", cf.slope / run.device.chi}};
    run.summary["t1_cavity"] = {{"fitted", tf.unbounded ? Json(nullptr) : Json(tf.t1)}, {"programmed", run.device.t1_cavity},
                                {"unbounded", tf.unbounded}};
    run.summary["geometric_phase"] = {{"frequency", cos.frequency}, {"period", 1.0 / cos.frequency}, {"amplitude", cos.amplitude},
                                      {"ok", cos.ok}};
    if (tf.unbounded) run.fail("t1 fit found no decay");
    if (!cos.ok) run.fail("geometric-phase cosine fit did not converge");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"catcomp: compressed cat states, photon loss and characteristic-function tomography"};
    app.require_subcommand(1);
    const std::map<std::string, void (*)(Run&)> commands = {
        {"compress", cmd_compress}, {"cat", cmd_cat},         {"charfun", cmd_charfun}, {"wigner", cmd_wigner},
        {"decay", cmd_decay},       {"parity", cmd_parity},   {"sweep", cmd_sweep},     {"budget", cmd_budget},
        {"optimize", cmd_optimize}, {"calibrate", cmd_calibrate}};
    const std::map<std::string, std::string> help = {
        {"compress", "run a coefficient schedule on vacuum and measure the compression"},
        {"cat", "create a compressed cat with the final conditional displacement"},
        {"charfun", "characteristic function of a state on a grid"},
        {"wigner", "Wigner function from the characteristic function"},
        {"decay", "blob-amplitude decay under photon loss"},
        {"parity", "parity decay under photon loss"},
        {"sweep", "blob and parity lifetimes across compression levels"},
        {"budget", "single-channel error budget of one U gate"},
        {"optimize", "search a compression schedule for a target"},
        {"calibrate", "chi, cavity T1 and geometric-phase calibration round trips"}};
    Flags flags;
    std::string chosen;
    for (const auto& [name, fn] : commands) {
        CLI::App* sub = app.add_subcommand(name, help.at(name));
        sub->add_option("--config", flags.config, "JSON with device, schedule and command parameters")->check(CLI::ExistingFile);
        sub->add_option("--out", flags.out, "output directory");
        sub->add_option("--seed", flags.seed, "random seed");
        sub->add_option("--mode", flags.mode, "loss evolution")->check(CLI::IsMember({"filter", "lindblad"}));
        sub->add_option("--grid", flags.grid, "square grid min:max:n");
        sub->add_option("--shots", flags.shots, "readout shots");
        sub->callback([&chosen, n = name] { chosen = n; });
    }
    CLI11_PARSE(app, argc, argv);

    Run run;
    run.command = chosen;
    run.flags = flags;
    try {
        commands.at(chosen)(run);
    } catch (const std::exception& e) {
        std::cerr << "catcomp " << chosen << ": " << e.what() << "\n";
        return 1;
    }
    run.summary["command"] = chosen;
    run.summary["fit_failed"] = run.fit_failed;
    run.summary["failures"] = run.failures;
    run.summary["warnings"] = take_warnings();
    run.dir.json("config.json", resolved_config(run));
    run.dir.flush(run.summary);
    std::cout << "catcomp " << chosen << ": wrote " << run.dir.root().string() << (run.fit_failed ? " (fit failure)" : "") << "\n";
    return run.fit_failed ? 2 : 0;
}
