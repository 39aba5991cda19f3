#pragma once

#include <Eigen/Sparse>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "catcomp/gates.hpp"
#include "catcomp/grids.hpp"
#include "catcomp/hilbert.hpp"

namespace catcomp {

using SparseMatrix = Eigen::SparseMatrix<cplx>;

// Collapse-rate conventions. Rates below are those multiplying D[op], i.e. L = sqrt(rate) op.
//   qubit:  half_tphi -> 1/(2 Tphi) sigma_z,  tphi -> 1/Tphi,  t2e -> 1/T2e
//   cavity: half_tphi -> 1/(2 Tphi_c) n,      coherence_time -> 2/Tphi_c
enum class QubitDephasing { half_tphi, tphi, t2e };
enum class CavityDephasing { half_tphi, coherence_time };

struct NoiseConfig {
    bool cavity_decay = false;
    bool cavity_dephasing = false;
    bool qubit_decay = false;
    bool qubit_dephasing = false;
    bool thermal = false;

    double kappa = 0.0;
    double cavity_dephasing_rate = 0.0;
    double qubit_decay_rate = 0.0;
    double qubit_dephasing_rate = 0.0;
    double thermal_population = 0.0;

    QubitDephasing qubit_convention = QubitDephasing::t2e;
    CavityDephasing cavity_convention = CavityDephasing::coherence_time;

    static NoiseConfig none() { return {}; }

    static NoiseConfig from_device(const DeviceParams& d, QubitDephasing qc = QubitDephasing::t2e,
                                   CavityDephasing cc = CavityDephasing::coherence_time) {
        d.validate();
        NoiseConfig n;
        n.qubit_convention = qc;
        n.cavity_convention = cc;
        n.kappa = 1.0 / d.t1_cavity;
        n.cavity_dephasing_rate = cc == CavityDephasing::coherence_time ? 2.0 / d.tphi_cavity : 0.5 / d.tphi_cavity;
        n.qubit_decay_rate = 1.0 / d.t1_qubit;
        const double gphi = d.qubit_pure_dephasing_rate();
        switch (qc) {
            case QubitDephasing::half_tphi: n.qubit_dephasing_rate = 0.5 * gphi; break;
            case QubitDephasing::tphi: n.qubit_dephasing_rate = gphi; break;
            case QubitDephasing::t2e: n.qubit_dephasing_rate = 1.0 / d.t2e_qubit; break;
        }
        n.thermal_population = d.thermal_population;
        return n;
    }

    NoiseConfig& enable_all() {
        cavity_decay = cavity_dephasing = qubit_decay = qubit_dephasing = thermal = true;
        return *this;
    }

    NoiseConfig only(const std::string& channel) const {
        NoiseConfig n = *this;
        n.cavity_decay = n.cavity_dephasing = n.qubit_decay = n.qubit_dephasing = n.thermal = false;
        if (channel == "cavity_decay") n.cavity_decay = true;
        else if (channel == "cavity_dephasing") n.cavity_dephasing = true;
        else if (channel == "qubit_decay") n.qubit_decay = true;
        else if (channel == "qubit_dephasing") n.qubit_dephasing = true;
        else if (channel == "thermal") n.thermal = true;
        else throw std::invalid_argument("NoiseConfig: unknown channel " + channel);
        return n;
    }

    bool any_dissipation() const { return cavity_decay || cavity_dephasing || qubit_decay || qubit_dephasing; }

    void validate() const {
        for (double r : {kappa, cavity_dephasing_rate, qubit_decay_rate, qubit_dephasing_rate})
            if (r < 0) throw std::invalid_argument("NoiseConfig: rates must be >= 0");
        if (thermal_population < 0 || thermal_population > 1)
            throw std::invalid_argument("NoiseConfig: thermal population outside [0,1]");
    }
};

// ------------------------------------------------------------------ photon loss

// C(nu, t) = C(nu e^{-kappa t/2}, 0) exp(-(1 - e^{-kappa t}) |nu|^2 / 2)
inline CharGrid loss_filter_char(const CharGrid& grid, double kappa, double t,
                                 Interpolation mode = Interpolation::cubic) {
    if (t < 0 || kappa < 0) throw std::invalid_argument("loss_filter_char: t and kappa must be >= 0");
    if (!axis_uniform(grid.re_axis) || !axis_uniform(grid.im_axis))
        throw std::invalid_argument("loss_filter_char: axes must be uniform");
    CharGrid out = grid;
    out.time = grid.time + t;
    const double eta = std::exp(-kappa * t);
    const double s = std::sqrt(eta);
    int outside = 0;
    for (std::size_t i = 0; i < grid.im_axis.size(); ++i) {
        for (std::size_t j = 0; j < grid.re_axis.size(); ++j) {
            const double x = grid.re_axis[j], y = grid.im_axis[i];
            bool inside = false;
            cplx c0 = interpolate(grid, x * s, y * s, mode, inside);
            if (!inside) ++outside;
            out.values(i, j) = c0 * std::exp(-0.5 * (1.0 - eta) * (x * x + y * y));
        }
    }
    if (outside > 0) warn("loss_filter_char: " + std::to_string(outside) + " rescaled points outside grid, set to 0");
    return out;
}

// Amplitude damping with loss parameter 1 - e^{-kappa t}, via the Kraus ladder.
inline DensityMatrix amplitude_damping_fock(const DensityMatrix& rho, double kappa, double t) {
    if (t < 0) throw std::invalid_argument("amplitude_damping_fock: negative t");
    if (kappa < 0) throw std::invalid_argument("amplitude_damping_fock: negative kappa");
    if (rho.factor != Factor::cavity) throw std::invalid_argument("amplitude_damping_fock: cavity-only state required");
    const int n = static_cast<int>(rho.matrix.rows());
    const double eta = std::exp(-kappa * t);
    const double loss = -std::expm1(-kappa * t);
    // amp(k, m) = sqrt(C(m,k) eta^{m-k} loss^k), the Kraus element <m-k|A_k|m>
    Eigen::MatrixXd amp = Eigen::MatrixXd::Zero(n, n);
    for (int m = 0; m < n; ++m) {
        for (int k = 0; k <= m; ++k) {
            if (loss == 0.0 && k > 0) continue;
            if (eta == 0.0 && k < m) continue;
            double lg = std::lgamma(m + 1.0) - std::lgamma(k + 1.0) - std::lgamma(m - k + 1.0);
            double lw = lg + (m - k) * (eta > 0 ? std::log(eta) : 0.0) + k * (loss > 0 ? std::log(loss) : 0.0);
            amp(k, m) = std::exp(0.5 * lw);
        }
    }
    Matrix out = Matrix::Zero(n, n);
    for (int k = 0; k < n; ++k)
        for (int m = k; m < n; ++m)
            for (int l = k; l < n; ++l) {
                const double w = amp(k, m) * amp(k, l);
                if (w != 0.0) out(m - k, l - k) += w * rho.matrix(m, l);
            }
    return {out, rho.space, Factor::cavity};
}

// ------------------------------------------------------------------ Lindblad integrator

inline SparseMatrix to_sparse(const Matrix& m, double tol = 0.0) {
    SparseMatrix s = m.sparseView(1.0, tol);
    s.makeCompressed();
    return s;
}

struct Stage {
    enum class Kind { evolve, unitary };
    Kind kind = Kind::evolve;
    double duration = 0.0;
    SparseMatrix hamiltonian;
    std::vector<SparseMatrix> collapse;
    Matrix unitary;
    std::string label;

    static Stage evolve(double duration, SparseMatrix h, std::vector<SparseMatrix> l, std::string label = {}) {
        Stage s;
        s.kind = Kind::evolve;
        s.duration = duration;
        s.hamiltonian = std::move(h);
        s.collapse = std::move(l);
        s.label = std::move(label);
        return s;
    }
    static Stage apply(Matrix u, std::string label = {}) {
        Stage s;
        s.kind = Kind::unitary;
        s.unitary = std::move(u);
        s.label = std::move(label);
        return s;
    }
};

struct EvolveResult {
    DensityMatrix rho;
    long steps = 0;
    double trace_drift = 0.0;
};

inline double sparse_inf_norm(const SparseMatrix& m) {
    Eigen::VectorXd rows = Eigen::VectorXd::Zero(m.rows());
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it) rows(it.row()) += std::abs(it.value());
    return rows.size() ? rows.maxCoeff() : 0.0;
}

// dt = duration / ceil(duration * 20 * max_rate)
inline double default_step(const Stage& s) {
    double rate = sparse_inf_norm(s.hamiltonian);
    for (const auto& l : s.collapse) rate += 0.5 * sparse_inf_norm(SparseMatrix(l.adjoint() * l));
    if (rate <= 0.0 || s.duration <= 0.0) return s.duration;
    return s.duration / std::ceil(s.duration * 20.0 * rate);
}

// Fixed-step RK4 for d rho/dt = -i[H, rho] + sum_k D[L_k] rho. dt <= 0 selects default_step per stage.
inline EvolveResult lindblad_evolve(const DensityMatrix& rho0, const std::vector<Stage>& program, double dt = 0.0,
                                    double trace_tolerance = 1e-7) {
    Matrix rho = rho0.matrix;
    const cplx tr0 = rho.trace();
    long steps = 0;
    double used_dt = 0.0;
    for (const Stage& st : program) {
        if (st.kind == Stage::Kind::unitary) {
            rho = st.unitary * rho * st.unitary.adjoint();
            continue;
        }
        if (st.duration < 0) throw std::invalid_argument("lindblad_evolve: negative stage duration");
        if (st.duration == 0) continue;
        SparseMatrix heff = st.hamiltonian;
        for (const auto& l : st.collapse) heff -= cplx(0, 0.5) * SparseMatrix(l.adjoint() * l);
        const double h = dt > 0 ? st.duration / std::ceil(st.duration / dt - 1e-9) : default_step(st);
        const long n = std::lround(st.duration / h);
        used_dt = std::max(used_dt, h);
        auto rhs = [&](const Matrix& r) {
            Matrix m = heff * r;
            Matrix out = -I_ * m + I_ * m.adjoint();
            for (const auto& l : st.collapse) {
                Matrix lr = l * r;
                out += l * lr.adjoint();
            }
            return out;
        };
        for (long k = 0; k < n; ++k) {
            Matrix k1 = rhs(rho);
            Matrix k2 = rhs(rho + (0.5 * h) * k1);
            Matrix k3 = rhs(rho + (0.5 * h) * k2);
            Matrix k4 = rhs(rho + h * k3);
            rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            rho = (0.5 * (rho + rho.adjoint())).eval();
        }
        steps += n;
    }
    const double drift = std::abs(rho.trace() - tr0);
    if (!(drift <= trace_tolerance)) {
        std::ostringstream os;
        os << "lindblad_evolve: trace drift " << drift << " exceeds " << trace_tolerance << "; retry with dt <= "
           << 0.5 * used_dt;
        throw std::runtime_error(os.str());
    }
    return {{rho, rho0.space, rho0.factor}, steps, drift};
}

// Static Hamiltonian with the configured channels, for cavity-only or composite states.
inline std::vector<SparseMatrix> collapse_operators(const NoiseConfig& noise, const SpaceSpec& s, Factor f,
                                                    cplx frame_alpha = 0.0) {
    noise.validate();
    std::vector<SparseMatrix> out;
    const int n = s.cavity_dim;
    auto cav = [&](const Matrix& m) { return f == Factor::cavity ? m : ops::embed_cavity(m, s); };
    if (noise.cavity_decay && noise.kappa > 0) out.push_back(to_sparse(std::sqrt(noise.kappa) * cav(ops::annihilation(n))));
    if (noise.cavity_dephasing && noise.cavity_dephasing_rate > 0) {
        Matrix a = ops::annihilation(n) + frame_alpha * Matrix::Identity(n, n);
        out.push_back(to_sparse(std::sqrt(noise.cavity_dephasing_rate) * cav(a.adjoint() * a)));
    }
    if (f == Factor::composite) {
        if (noise.qubit_decay && noise.qubit_decay_rate > 0)
            out.push_back(to_sparse(std::sqrt(noise.qubit_decay_rate) * ops::embed_qubit(ops::lowering(), s)));
        if (noise.qubit_dephasing && noise.qubit_dephasing_rate > 0)
            out.push_back(to_sparse(std::sqrt(noise.qubit_dephasing_rate) * ops::embed_qubit(ops::pauli_z(), s)));
    }
    return out;
}

inline EvolveResult lindblad_evolve(const DensityMatrix& rho0, const Matrix& hamiltonian, const NoiseConfig& noise,
                                    double duration, double dt = 0.0) {
    std::vector<Stage> p{Stage::evolve(duration, to_sparse(hamiltonian), collapse_operators(noise, rho0.space, rho0.factor))};
    return lindblad_evolve(rho0, p, dt);
}

struct PulseOptions {
    double qubit_detuning = 0.0;  // static (delta/2) sigma_z added during dwells
};

// Dwell Hamiltonian in the frame displaced by alpha: -(chi/2) A^dag A Z_d (- K/2 A^dag^2 A^2), A = a + alpha.
inline Matrix dwell_hamiltonian(cplx alpha, const DeviceParams& d, const SpaceSpec& s, const PulseOptions& o = {}) {
    const int n = s.cavity_dim;
    Matrix a = ops::annihilation(n) + alpha * Matrix::Identity(n, n);
    Matrix ada = a.adjoint() * a;
    Matrix h = -0.5 * d.chi * ops::kron(ops::dispersive_z(), ada, s.ordering);
    if (d.kerr_enabled && d.kerr > 0) {
        Matrix a2 = a * a;
        h -= 0.5 * d.kerr * ops::embed_cavity(a2.adjoint() * a2, s);
    }
    if (o.qubit_detuning != 0.0) h += 0.5 * o.qubit_detuning * ops::embed_qubit(ops::pauli_z(), s);
    return h;
}

inline std::vector<Stage> ecd_program(cplx beta, const DeviceParams& d, const NoiseConfig& noise, const SpaceSpec& s,
                                      const PulseOptions& o = {}) {
    EcdSchedule sch = ecd_pulse_schedule(beta, d);
    std::vector<Stage> p;
    for (const PulseSegment& seg : sch.segments) {
        if (seg.qubit_flip_before) p.push_back(Stage::apply(qubit_rotation(Axis::x, PI, s).matrix, "echo"));
        p.push_back(Stage::evolve(seg.duration, to_sparse(dwell_hamiltonian(seg.cavity_drive_alpha, d, s, o)),
                                  collapse_operators(noise, s, Factor::composite, seg.cavity_drive_alpha), "dwell"));
    }
    p.push_back(Stage::apply(ops::embed_cavity(ops::displacement(sch.return_displacement, s.cavity_dim), s), "return"));
    Matrix fz = Matrix::Zero(2, 2);
    fz(0, 0) = std::polar(1.0, -sch.frame_phase);
    fz(1, 1) = std::polar(1.0, sch.frame_phase);
    p.push_back(Stage::apply(ops::embed_qubit(fz, s), "frame"));
    return p;
}

inline void append_rotation(std::vector<Stage>& p, const Matrix& q2, const DeviceParams& d, const NoiseConfig& noise,
                            const SpaceSpec& s) {
    p.push_back(Stage::apply(ops::embed_qubit(q2, s), "rotation"));
    if (d.rotation_duration > 0)
        p.push_back(Stage::evolve(d.rotation_duration, to_sparse(dwell_hamiltonian(0.0, d, s)),
                                  collapse_operators(noise, s, Factor::composite), "idle"));
}

inline std::vector<Stage> uv_gate_program(UV which, double coeff, const DeviceParams& d, const NoiseConfig& noise,
                                          const SpaceSpec& s, const PulseOptions& o = {}) {
    UvFraming f = uv_framing(which, coeff);
    std::vector<Stage> p;
    append_rotation(p, f.pre, d, noise, s);
    auto e = ecd_program(f.beta, d, noise, s, o);
    p.insert(p.end(), e.begin(), e.end());
    append_rotation(p, f.post, d, noise, s);
    return p;
}

// Initial qubit mixture from the thermal population, cavity state unchanged.
inline DensityMatrix with_thermal_qubit(const PureState& cavity, double p_excited) {
    const SpaceSpec& s = cavity.space;
    PureState g = tensor(make_qubit(QubitLabel::g, s), cavity);
    PureState e = tensor(make_qubit(QubitLabel::e, s), cavity);
    Matrix m = (1.0 - p_excited) * g.amplitudes * g.amplitudes.adjoint() + p_excited * e.amplitudes * e.amplitudes.adjoint();
    return {m, s, Factor::composite};
}

// ------------------------------------------------------------------ dispersive rotation

// exp(+i chi t n/2) for qubit e, exp(-i chi t n/2) for g.
inline PureState dispersive_rotation(const PureState& state, double t, const DeviceParams& d, QubitLabel q) {
    if (state.factor != Factor::cavity) throw std::invalid_argument("dispersive_rotation: cavity-only state required");
    const double sign = q == QubitLabel::e ? 1.0 : -1.0;
    PureState out = state;
    for (Eigen::Index k = 0; k < out.amplitudes.size(); ++k)
        out.amplitudes(k) *= std::polar(1.0, sign * 0.5 * d.chi * t * double(k));
    return out;
}

}  // namespace catcomp
