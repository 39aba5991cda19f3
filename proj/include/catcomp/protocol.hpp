#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "catcomp/dynamics.hpp"
#include "catcomp/fit.hpp"
#include "catcomp/gates.hpp"
#include "catcomp/hilbert.hpp"
#include "catcomp/nelder_mead.hpp"
#include "catcomp/tomography.hpp"

namespace catcomp {

enum class Variant { compress_then_displace, cat_then_compress };

inline const char* variant_name(Variant v) {
    return v == Variant::compress_then_displace ? "compress-then-displace" : "cat-then-compress";
}

inline Variant parse_variant(const std::string& s) {
    if (s == "compress-then-displace") return Variant::compress_then_displace;
    if (s == "cat-then-compress") return Variant::cat_then_compress;
    throw std::invalid_argument("unknown variant " + s);
}

struct UvStep {
    double u = 0, v = 0;
};

struct CompressionSchedule {
    std::vector<UvStep> steps;
    std::optional<double> final_v;
    double target_db = 0;
    Variant variant = Variant::compress_then_displace;

    void validate(double bound = 2.5) const {
        if (steps.empty()) throw std::invalid_argument("CompressionSchedule: at least one step required");
        for (const auto& s : steps)
            if (std::abs(s.u) > bound + 1e-12 || std::abs(s.v) > bound + 1e-12 || !std::isfinite(s.u) || !std::isfinite(s.v))
                throw std::invalid_argument("CompressionSchedule: coefficient outside bound");
    }
};

// Optimised three-step rows, keyed by target dB.
inline CompressionSchedule reference_schedule(int target_db) {
    CompressionSchedule s;
    s.target_db = target_db;
    switch (target_db) {
        case -3: s.steps = {{1.39, 0.51}, {-0.2, -0.46}, {-0.32, -0.65}}; break;
        case -5: s.steps = {{-0.48, 0.51}, {-1.85, -0.31}, {0.56, 0.91}}; break;
        case -6: s.steps = {{1.6, 0.39}, {-0.48, -1.04}, {-1.11, 0.32}}; break;
        case -7: s.steps = {{-0.83, 0.56}, {1.3, -0.56}, {-1.26, 0.39}}; break;
        default: throw std::invalid_argument("reference_schedule: rows exist for -3, -5, -6, -7 dB");
    }
    return s;
}

// ------------------------------------------------------------------ squeezed-cat bookkeeping

inline cplx gamma_adjust(cplx alpha, double r, double theta) {
    return alpha * std::cosh(r) + std::conj(alpha) * std::polar(1.0, theta) * std::sinh(r);
}

inline cplx gamma_adjust_inverse(cplx gamma, double r, double theta) {
    const cplx c1 = gamma_adjust(1.0, r, theta), ci = gamma_adjust(I_, r, theta);
    Eigen::Matrix2d m;
    m << c1.real(), ci.real(), c1.imag(), ci.imag();
    Eigen::Vector2d ab = m.fullPivLu().solve(Eigen::Vector2d(gamma.real(), gamma.imag()));
    return {ab(0), ab(1)};
}

struct CatSpec {
    cplx alpha = 0;
    int parity = 1;
    double squeeze_r = 0;
    double squeeze_theta = 0;
    cplx gamma = 0;
    double xi_db = 0;

    static CatSpec from_alpha(cplx alpha, int parity, double r, double theta = 0) {
        return {alpha, parity, r, theta, gamma_adjust(alpha, r, theta), db_from_squeeze_r(r)};
    }
    static CatSpec from_gamma(cplx gamma, int parity, double r, double theta = 0) {
        return {gamma_adjust_inverse(gamma, r, theta), parity, r, theta, gamma, db_from_squeeze_r(r)};
    }
    static CatSpec from_db(cplx gamma, int parity, double db, double theta = 0) {
        return from_gamma(gamma, parity, squeeze_r_from_db(db), theta);
    }
    PureState state(const SpaceSpec& s) const { return make_squeezed_cat(gamma, squeeze_r, squeeze_theta, parity, s); }
};

// V(v) displaces by v/2, so the cat of S(r) cat(gamma) needs v = 2 |gamma_adjust^{-1}(gamma)|.
inline double cat_final_v(double gamma, double r) { return 2.0 * std::abs(gamma_adjust_inverse(gamma, r, 0.0)); }

// ------------------------------------------------------------------ fast noiseless engine

// exp(i u P sigma_x) and exp(i v X sigma_y) applied through eigenbases of the truncated quadratures.
// Amplitudes are split into the qubit-g and qubit-e cavity blocks.
class UvEngine {
public:
    explicit UvEngine(int n) : n_(n) {
        Eigen::SelfAdjointEigenSolver<Matrix> ex(ops::quad_x(n)), ep(ops::quad_p(n));
        vx_ = ex.eigenvectors();
        lx_ = ex.eigenvalues();
        vp_ = ep.eigenvectors();
        lp_ = ep.eigenvalues();
    }

    int dim() const { return n_; }

    void apply(UV which, double c, Vector& g, Vector& e) const {
        const double s = 1.0 / std::sqrt(2.0);
        if (which == UV::U) {
            Vector p = s * (g + e), m = s * (g - e);
            p = phase(vp_, lp_, c, p);
            m = phase(vp_, lp_, -c, m);
            g = s * (p + m);
            e = s * (p - m);
        } else {
            Vector p = s * (g - I_ * e), m = s * (g + I_ * e);
            p = phase(vx_, lx_, c, p);
            m = phase(vx_, lx_, -c, m);
            g = s * (p + m);
            e = I_ * s * (p - m);
        }
    }

    static void rotate(double phi, Vector& v) {
        for (Eigen::Index k = 0; k < v.size(); ++k) v(k) *= std::polar(1.0, phi * double(k));
    }

private:
    static Vector phase(const Matrix& vecs, const Eigen::VectorXd& vals, double c, const Vector& x) {
        Vector y = vecs.adjoint() * x;
        for (Eigen::Index k = 0; k < y.size(); ++k) y(k) *= std::polar(1.0, c * vals(k));
        return vecs * y;
    }

    int n_;
    Matrix vx_, vp_;
    Eigen::VectorXd lx_, lp_;
};

// ------------------------------------------------------------------ protocol

struct ProtocolOptions {
    double frame_rotation = -PI / 2;  // virtual cavity rotation exp(i phi n) on the output
    DeviceParams device;
    PulseOptions pulse;
    double lindblad_dt = 0.0;
};

enum class Outcome { none, g, e };

inline const char* outcome_name(Outcome o) { return o == Outcome::none ? "none" : o == Outcome::g ? "g" : "e"; }

struct ProtocolResult {
    DensityMatrix cavity_state;
    std::optional<PureState> cavity_pure;
    Outcome qubit_outcome = Outcome::none;
    double outcome_probability = 1.0;
    double complementary_probability = 0.0;
    double elapsed_model_time = 0.0;
};

inline double uv_gate_duration(double coeff, const DeviceParams& d) {
    return d.ecd_unit_duration * std::abs(coeff) + 2.0 * d.rotation_duration;
}

inline double schedule_duration(const CompressionSchedule& s, const DeviceParams& d) {
    double t = 0;
    for (const auto& st : s.steps) t += uv_gate_duration(st.u, d) + uv_gate_duration(st.v, d);
    if (s.final_v) t += uv_gate_duration(*s.final_v, d);
    return t;
}

namespace detail {

inline void check_protocol_headroom(const Vector& g, const Vector& e, int n) {
    const int tail = std::max(1, n / 10);
    double w = g.tail(tail).squaredNorm() + e.tail(tail).squaredNorm();
    if (w > 1e-6) throw std::runtime_error("run_compression: truncation headroom violated (tail weight " + std::to_string(w) + ")");
}

inline PureState cavity_raw(const std::optional<PureState>& initial, const SpaceSpec& s, double frame_rotation) {
    if (!initial) return make_vacuum(s);
    if (initial->factor != Factor::cavity || initial->amplitudes.size() != s.cavity_dim)
        throw std::invalid_argument("run_compression: initial state must be a cavity state of the run's dimension");
    PureState p = *initial;
    UvEngine::rotate(-frame_rotation, p.amplitudes);
    return p;
}

inline PureState join(const Vector& g, const Vector& e, const SpaceSpec& s) {
    Vector v = tensor(make_qubit(QubitLabel::g, s), PureState{g, s, Factor::cavity}).amplitudes +
               tensor(make_qubit(QubitLabel::e, s), PureState{e, s, Factor::cavity}).amplitudes;
    return {v, s, Factor::composite};
}

inline std::vector<Stage> schedule_program(const CompressionSchedule& sch, bool with_final, const NoiseConfig& noise,
                                           const SpaceSpec& s, const ProtocolOptions& o) {
    std::vector<Stage> p;
    auto add = [&](UV w, double c) {
        auto g = uv_gate_program(w, c, o.device, noise, s, o.pulse);
        p.insert(p.end(), g.begin(), g.end());
    };
    for (const auto& st : sch.steps) {
        add(UV::U, st.u);
        add(UV::V, st.v);
    }
    if (with_final) add(UV::V, *sch.final_v);
    return p;
}

inline DensityMatrix noisy_run(const CompressionSchedule& sch, bool with_final, const SpaceSpec& s,
                               const NoiseConfig& noise, const ProtocolOptions& o, const PureState& cav0) {
    DensityMatrix rho0 = noise.thermal ? with_thermal_qubit(cav0, noise.thermal_population)
                                       : to_density(tensor(make_qubit(QubitLabel::g, s), cav0));
    EvolveResult r = lindblad_evolve(rho0, schedule_program(sch, with_final, noise, s, o), o.lindblad_dt);
    return r.rho;
}

inline Matrix frame_matrix(double phi, const SpaceSpec& s) {
    return ops::embed_cavity(ops::rotation_phase(phi, s.cavity_dim), s);
}

}  // namespace detail

// Applies U_k then V_k for each step from |g> (x) initial (vacuum by default). The initial cavity state
// and the output are in the rotated frame set by options.frame_rotation.
inline ProtocolResult run_compression(const CompressionSchedule& schedule, const SpaceSpec& space,
                                      const std::optional<NoiseConfig>& noise = std::nullopt,
                                      const ProtocolOptions& options = {},
                                      const std::optional<PureState>& initial_cavity = std::nullopt) {
    schedule.validate();
    space.validate();
    ProtocolResult out;
    out.elapsed_model_time = schedule_duration(schedule, options.device) -
                             (schedule.final_v ? uv_gate_duration(*schedule.final_v, options.device) : 0.0);
    PureState cav0 = detail::cavity_raw(initial_cavity, space, options.frame_rotation);
    if (noise && (noise->any_dissipation() || noise->thermal)) {
        CompressionSchedule plain = schedule;
        plain.final_v.reset();
        DensityMatrix rho = detail::noisy_run(plain, false, space, *noise, options, cav0);
        Matrix f = detail::frame_matrix(options.frame_rotation, space);
        rho.matrix = f * rho.matrix * f.adjoint();
        out.cavity_state = cavity_reduced(rho);
        return out;
    }
    UvEngine eng(space.cavity_dim);
    Vector g = cav0.amplitudes, e = Vector::Zero(space.cavity_dim);
    for (const auto& st : schedule.steps) {
        eng.apply(UV::U, st.u, g, e);
        eng.apply(UV::V, st.v, g, e);
        detail::check_protocol_headroom(g, e, space.cavity_dim);
    }
    UvEngine::rotate(options.frame_rotation, g);
    UvEngine::rotate(options.frame_rotation, e);
    out.cavity_state = cavity_reduced(detail::join(g, e, space));
    return out;
}

// Compression, V(final_v), then projection of the qubit onto `outcome` (g: even cat, e: odd cat).
inline ProtocolResult create_compressed_cat(const CompressionSchedule& schedule, const SpaceSpec& space, QubitLabel outcome,
                                            const std::optional<NoiseConfig>& noise = std::nullopt,
                                            const ProtocolOptions& options = {}) {
    if (!schedule.final_v) throw std::invalid_argument("create_compressed_cat: schedule.final_v not set");
    schedule.validate();
    space.validate();
    ProtocolResult out;
    out.qubit_outcome = outcome == QubitLabel::g ? Outcome::g : Outcome::e;
    out.elapsed_model_time = schedule_duration(schedule, options.device);
    const int q = outcome == QubitLabel::g ? 0 : 1;
    if (noise && (noise->any_dissipation() || noise->thermal)) {
        DensityMatrix rho = detail::noisy_run(schedule, true, space, *noise, options, make_vacuum(space));
        Matrix pr = ops::embed_qubit(ops::projector(q), space), pc = ops::embed_qubit(ops::projector(1 - q), space);
        const double p = (pr * rho.matrix).trace().real();
        out.outcome_probability = p;
        out.complementary_probability = (pc * rho.matrix).trace().real();
        if (p < 1e-6) throw std::runtime_error("create_compressed_cat: outcome probability below 1e-6");
        Matrix f = detail::frame_matrix(options.frame_rotation, space);
        Matrix m = f * pr * rho.matrix * pr * f.adjoint() / p;
        out.cavity_state = cavity_reduced(DensityMatrix{m, space, Factor::composite});
        return out;
    }
    UvEngine eng(space.cavity_dim);
    Vector g = make_vacuum(space).amplitudes, e = Vector::Zero(space.cavity_dim);
    for (const auto& st : schedule.steps) {
        eng.apply(UV::U, st.u, g, e);
        eng.apply(UV::V, st.v, g, e);
    }
    eng.apply(UV::V, *schedule.final_v, g, e);
    detail::check_protocol_headroom(g, e, space.cavity_dim);
    Vector sel = q == 0 ? g : e;
    const double p = sel.squaredNorm();
    out.outcome_probability = p;
    out.complementary_probability = (q == 0 ? e : g).squaredNorm();
    if (p < 1e-6) throw std::runtime_error("create_compressed_cat: outcome probability below 1e-6");
    sel /= std::sqrt(p);
    UvEngine::rotate(options.frame_rotation, sel);
    out.cavity_pure = PureState{sel, space, Factor::cavity};
    out.cavity_state = to_density(*out.cavity_pure);
    return out;
}

// ------------------------------------------------------------------ compression in dB

enum class Quadrature { X, P };

struct CompressionMeasurement {
    double db = 0;
    double sigma = 0;
    double sigma_vac = 0;
    double relative_residual = 0;
    bool non_gaussian = false;
};

inline CompressionMeasurement measure_compression_db(const std::vector<double>& axis, const Vector& cut) {
    if (axis.size() != static_cast<std::size_t>(cut.size()) || axis.size() < 5)
        throw std::invalid_argument("measure_compression_db: cut too short or mismatched");
    const int i0 = axis_index_of(axis, 0.0);
    if (i0 < 0) throw std::invalid_argument("measure_compression_db: cut must contain nu = 0");
    auto central = [&](const std::vector<double>& y, std::vector<double>& xs, std::vector<double>& ys) {
        const double thr = 0.3 * y[i0];
        int lo = i0, hi = i0;
        while (lo > 0 && y[lo - 1] > thr) --lo;
        while (hi + 1 < static_cast<int>(y.size()) && y[hi + 1] > thr) ++hi;
        xs.assign(axis.begin() + lo, axis.begin() + hi + 1);
        ys.assign(y.begin() + lo, y.begin() + hi + 1);
    };
    auto width = [&](const std::vector<double>& y, double& rel) {
        std::vector<double> xs, ys;
        central(y, xs, ys);
        if (xs.size() < 5) throw std::runtime_error("measure_compression_db: central peak under-resolved");
        double s0 = 0.5 * (xs.back() - xs.front());
        fit::Gaussian g = fit::fit_gaussian(xs, ys, y[i0], 0.0, std::max(s0, 1e-3), true);
        if (!g.ok || !(g.sigma > 0)) throw std::runtime_error("measure_compression_db: Gaussian fit did not converge");
        rel = std::sqrt(g.rss / double(xs.size())) / std::abs(g.amplitude);
        return g.sigma;
    };
    std::vector<double> y(axis.size()), yv(axis.size());
    for (std::size_t i = 0; i < axis.size(); ++i) {
        y[i] = cut(static_cast<Eigen::Index>(i)).real();
        yv[i] = std::exp(-0.5 * axis[i] * axis[i]);
    }
    CompressionMeasurement m;
    double relv = 0;
    m.sigma = width(y, m.relative_residual);
    m.sigma_vac = width(yv, relv);
    m.db = 20.0 * std::log10(m.sigma / m.sigma_vac);
    // side loops or fringes inside three widths mark a non-Gaussian centre
    for (std::size_t i = 0; i < axis.size(); ++i)
        if (std::abs(axis[i]) < 3.0 * m.sigma && y[i] < -0.01 * y[i0]) m.non_gaussian = true;
    if (m.relative_residual > 0.02) m.non_gaussian = true;
    return m;
}

inline CompressionMeasurement measure_compression_db(const CharGrid& grid, Quadrature q) {
    // the Re[nu] cut is <exp(-2 i u P)>, whose width tracks the X quadrature
    if (q == Quadrature::X) return measure_compression_db(grid.re_axis, grid.re_cut());
    return measure_compression_db(grid.im_axis, grid.im_cut());
}

template <class State>
CompressionMeasurement measure_compression_db(const State& state, Quadrature q, double extent = 6.0, int n = 601) {
    GridAxes ax = q == Quadrature::X ? GridAxes::re_cut(-extent, extent, n) : GridAxes::im_cut(-extent, extent, n);
    return measure_compression_db(char_function(state, ax), q);
}

// ------------------------------------------------------------------ optimisation

struct OptimizeSpec {
    Variant variant = Variant::compress_then_displace;
    double target_db = -3;
    double cat_alpha = 1.8;  // cat-then-compress: initial cat(alpha), target CatSpec::from_alpha(alpha).state()
    int parity = -1;
    int n_steps = 3;
    double bounds = 2.5;
    double start_range = 2.5;  // restarts start uniformly in [-start_range, start_range]
    int restarts = 48;
    unsigned long long seed = 1;
    int max_evals = 4000;
    double frame_rotation = -PI / 2;
    int cavity_dim = 50;
};

struct OptimizeResult {
    CompressionSchedule schedule;
    double overlap = 0;
    bool failed = false;
    int best_restart = -1;
    std::vector<double> restart_overlaps;
    long evals = 0;
    unsigned long long seed = 0;
};

inline PureState optimize_target(const OptimizeSpec& spec, const SpaceSpec& s) {
    const double r = squeeze_r_from_db(spec.target_db);
    if (spec.variant == Variant::compress_then_displace) return make_squeezed_vacuum(r, 0.0, s);
    return CatSpec::from_alpha(spec.cat_alpha, spec.parity, r).state(s);
}

inline OptimizeResult optimize_schedule(const OptimizeSpec& spec) {
    if (spec.n_steps < 1 || spec.n_steps > 5) throw std::invalid_argument("optimize_schedule: n_steps must be in [1, 5]");
    if (spec.restarts < 1) throw std::invalid_argument("optimize_schedule: restarts must be >= 1");
    SpaceSpec s(spec.cavity_dim);
    UvEngine eng(s.cavity_dim);
    PureState target = optimize_target(spec, s);
    Vector t_raw = target.amplitudes;
    UvEngine::rotate(-spec.frame_rotation, t_raw);
    Vector g0 = make_vacuum(s).amplitudes;
    if (spec.variant == Variant::cat_then_compress) {
        g0 = make_cat(spec.cat_alpha, spec.parity, s).amplitudes;
        UvEngine::rotate(-spec.frame_rotation, g0);
    }
    const int np = 2 * spec.n_steps;
    auto overlap = [&](const Eigen::VectorXd& x) {
        Vector g = g0, e = Vector::Zero(s.cavity_dim);
        for (int k = 0; k < spec.n_steps; ++k) {
            eng.apply(UV::U, x(2 * k), g, e);
            eng.apply(UV::V, x(2 * k + 1), g, e);
        }
        return std::norm(t_raw.dot(g)) + std::norm(t_raw.dot(e));
    };
    auto clip = [&](const Eigen::VectorXd& x) { return Eigen::VectorXd(x.cwiseMax(-spec.bounds).cwiseMin(spec.bounds)); };
    // evaluated at the clipped point, plus a quadratic penalty for the excursion
    auto objective = [&](const Eigen::VectorXd& x) {
        double pen = (x - clip(x)).squaredNorm();
        return 1.0 - overlap(clip(x)) + 10.0 * pen;
    };
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> start(-spec.start_range, spec.start_range);
    OptimizeResult res;
    res.seed = spec.seed;
    Eigen::VectorXd best;
    double bestf = std::numeric_limits<double>::infinity();
    NelderMeadOptions nmo;
    nmo.max_evals = spec.max_evals;
    for (int rr = 0; rr < spec.restarts; ++rr) {
        Eigen::VectorXd x0(np);
        for (int i = 0; i < np; ++i) x0(i) = start(rng);
        NelderMeadResult nm = nelder_mead(objective, x0, nmo);
        res.evals += nm.evals;
        Eigen::VectorXd x = clip(nm.x);
        double ov = overlap(x);
        res.restart_overlaps.push_back(ov);
        if (1.0 - ov < bestf) {
            bestf = 1.0 - ov;
            best = x;
            res.best_restart = rr;
        }
    }
    res.overlap = overlap(best);
    res.failed = res.overlap < 0.95;
    res.schedule.target_db = spec.target_db;
    res.schedule.variant = spec.variant;
    for (int k = 0; k < spec.n_steps; ++k) res.schedule.steps.push_back({best(2 * k), best(2 * k + 1)});
    if (spec.variant == Variant::compress_then_displace && spec.cat_alpha > 0) res.schedule.final_v = 2.0 * spec.cat_alpha;
    return res;
}

}  // namespace catcomp
