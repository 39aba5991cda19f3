#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "catcomp/hilbert.hpp"

namespace catcomp {

// Angular frequencies in rad/s, times in s.
struct DeviceParams {
    double chi = 2 * PI * 40e3;
    double kerr = 2 * PI * 10.0;
    bool kerr_enabled = false;
    double t1_cavity = 260e-6;
    double tphi_cavity = 5e-3;
    double t1_qubit = 20e-6;
    double t2e_qubit = 20e-6;
    double ecd_unit_duration = 688e-9;
    double lever_alpha0 = 0.0;  // 0 means derive as 1/(chi * ecd_unit_duration)
    double rotation_duration = 0.0;
    double readout_p_gg = 0.986;
    double readout_p_ee = 0.95;
    double thermal_population = 0.015;

    double lever() const { return lever_alpha0 > 0 ? lever_alpha0 : 1.0 / (chi * ecd_unit_duration); }
    double kappa() const { return 1.0 / t1_cavity; }
    double qubit_pure_dephasing_rate() const { return 1.0 / t2e_qubit - 1.0 / (2.0 * t1_qubit); }

    void validate() const {
        for (double t : {t1_cavity, tphi_cavity, t1_qubit, t2e_qubit, ecd_unit_duration})
            if (!(t > 0)) throw std::invalid_argument("DeviceParams: timescales must be > 0");
        if (!(chi > 0)) throw std::invalid_argument("DeviceParams: chi must be > 0");
        if (kerr < 0 || rotation_duration < 0 || lever_alpha0 < 0)
            throw std::invalid_argument("DeviceParams: negative parameter");
        for (double p : {readout_p_gg, readout_p_ee, thermal_population})
            if (p < 0 || p > 1) throw std::invalid_argument("DeviceParams: probability outside [0,1]");
        if (qubit_pure_dephasing_rate() < -1e-12)
            throw std::invalid_argument("DeviceParams: 1/T2e - 1/(2 T1q) must be >= 0");
    }
};

enum class Axis { x, y, z };

inline Matrix qubit_rotation_2x2(Axis axis, double angle) {
    Matrix s = axis == Axis::x ? ops::pauli_x() : axis == Axis::y ? ops::pauli_y() : ops::pauli_z();
    return std::cos(angle / 2) * Matrix::Identity(2, 2) - I_ * std::sin(angle / 2) * s;
}

inline Operator qubit_rotation(Axis axis, double angle, const SpaceSpec& space) {
    return {ops::embed_qubit(qubit_rotation_2x2(axis, angle), space), space, Factor::composite};
}

// D(beta/2) (x) |g><e| + D(-beta/2) (x) |e><g|
inline Operator ecd_unitary(cplx beta, const SpaceSpec& space) {
    check_headroom(beta / 2.0, space.cavity_dim, "ecd_unitary");
    const int n = space.cavity_dim;
    Matrix ge = Matrix::Zero(2, 2), eg = Matrix::Zero(2, 2);
    ge(0, 1) = 1.0;
    eg(1, 0) = 1.0;
    Matrix m = ops::kron(ge, ops::displacement(beta / 2.0, n), space.ordering) +
               ops::kron(eg, ops::displacement(-beta / 2.0, n), space.ordering);
    return {m, space, Factor::composite};
}

// CD(beta) = D(beta/2) (x) |g><g| + D(-beta/2) (x) |e><e|, no echo flip.
inline Operator conditional_displacement(cplx beta, const SpaceSpec& space) {
    const int n = space.cavity_dim;
    Matrix m = ops::kron(ops::projector(0), ops::displacement(beta / 2.0, n), space.ordering) +
               ops::kron(ops::projector(1), ops::displacement(-beta / 2.0, n), space.ordering);
    return {m, space, Factor::composite};
}

enum class UV { U, V };

// exp(i u P sigma_x) or exp(i v X sigma_y), by dense exponential.
inline Operator uv_exponential(UV which, double coeff, const SpaceSpec& space) {
    const int n = space.cavity_dim;
    Matrix g = which == UV::U ? ops::kron(ops::pauli_x(), ops::quad_p(n), space.ordering)
                              : ops::kron(ops::pauli_y(), ops::quad_x(n), space.ordering);
    Matrix e = (I_ * coeff * g).exp();
    return {e, space, Factor::composite};
}

// The sequences printed next to the exponential forms. They differ from them:
// literal U(u) = sigma_x exp(i u P sigma_x) and literal V(v) = exp(-i v X sigma_y), up to phase.
inline Operator literal_uv_sequence(UV which, double coeff, const SpaceSpec& space) {
    if (which == UV::U) {
        Matrix r = qubit_rotation(Axis::y, -PI / 2, space).matrix;
        return {r * ecd_unitary(coeff, space).matrix * r, space, Factor::composite};
    }
    Matrix r = qubit_rotation(Axis::x, PI / 2, space).matrix;
    return {r * ecd_unitary(I_ * coeff, space).matrix * r, space, Factor::composite};
}

// ECD-based realisations equal to uv_exponential up to a global phase:
//   U(u) = R_x(pi) R_y(-pi/2) ECD(u) R_y(-pi/2)
//   V(v) = R_x(pi/2) ECD(-i v) R_x(pi/2)
inline Operator build_uv_gate(UV which, double coeff, const SpaceSpec& space) {
    if (which == UV::U) {
        Matrix ry = qubit_rotation(Axis::y, -PI / 2, space).matrix;
        Matrix rx = qubit_rotation(Axis::x, PI, space).matrix;
        return {rx * ry * ecd_unitary(coeff, space).matrix * ry, space, Factor::composite};
    }
    Matrix rx = qubit_rotation(Axis::x, PI / 2, space).matrix;
    return {rx * ecd_unitary(-I_ * coeff, space).matrix * rx, space, Factor::composite};
}

// Qubit rotations wrapped around the ECD in build_uv_gate, as 2x2 matrices applied
// before (pre) and after (post) the conditional displacement ECD(beta).
struct UvFraming {
    Matrix pre;
    Matrix post;
    cplx beta;
};

inline UvFraming uv_framing(UV which, double coeff) {
    if (which == UV::U)
        return {qubit_rotation_2x2(Axis::y, -PI / 2),
                qubit_rotation_2x2(Axis::x, PI) * qubit_rotation_2x2(Axis::y, -PI / 2), cplx(coeff, 0)};
    return {qubit_rotation_2x2(Axis::x, PI / 2), qubit_rotation_2x2(Axis::x, PI / 2), -I_ * coeff};
}

// ------------------------------------------------------------------ pulse level

struct PulseSegment {
    double duration = 0;
    cplx cavity_drive_alpha = 0;
    bool qubit_flip_before = false;
};

// Piecewise-constant echoed ECD. Segments are dwells in the frame displaced by
// cavity_drive_alpha; the displacements between them are instantaneous. After the
// last dwell the cavity is returned by `return_displacement` and a virtual qubit
// Z rotation exp(-i frame_phase sigma_z) removes the accumulated frame phase.
struct EcdSchedule {
    cplx beta = 0;
    std::vector<PulseSegment> segments;
    cplx return_displacement = 0;
    double frame_phase = 0;
    double lever = 0;

    double total_duration() const {
        double t = 0;
        for (const auto& s : segments) t += s.duration;
        return t;
    }
    int flip_count() const {
        int k = 0;
        for (const auto& s : segments) k += s.qubit_flip_before ? 1 : 0;
        return k;
    }
};

inline EcdSchedule ecd_pulse_schedule(cplx beta, const DeviceParams& device) {
    device.validate();
    if (!(device.lever() > 0)) throw std::invalid_argument("ecd_pulse_schedule: lever must be > 0");
    EcdSchedule s;
    s.beta = beta;
    const double tau = 0.5 * device.ecd_unit_duration * std::abs(beta);
    const double theta = 0.5 * device.chi * tau;
    if (theta >= PI / 2)
        throw std::invalid_argument("ecd_pulse_schedule: |beta| unreachable within the dwell-time cap");
    cplx a0;
    if (std::abs(beta) == 0.0) {
        a0 = device.lever();
    } else {
        a0 = -I_ * beta / (4.0 * std::sin(theta));
    }
    s.lever = std::abs(a0);
    s.segments.push_back({tau, a0, false});
    s.segments.push_back({tau, -a0, true});
    s.return_displacement = -2.0 * a0 * (1.0 - std::cos(theta));
    s.frame_phase = 4.0 * std::norm(a0) * (1.0 - std::cos(theta)) * std::sin(theta);
    return s;
}

// <sigma_x> after D(-i a) CD(-1) D(i a) CD(1) on vacuum (x) (|g>+|e>)/sqrt2.
inline std::vector<double> geometric_phase_scan(const std::vector<double>& alphas, const SpaceSpec& space) {
    std::vector<double> out;
    out.reserve(alphas.size());
    PureState q = make_qubit(PI / 2, 0.0, space);
    PureState psi0 = tensor(q, make_vacuum(space));
    Matrix cdp = conditional_displacement(1.0, space).matrix;
    Matrix cdm = conditional_displacement(-1.0, space).matrix;
    Matrix sx = ops::embed_qubit(ops::pauli_x(), space);
    for (double a : alphas) {
        Matrix dp = ops::embed_cavity(ops::displacement(I_ * a, space.cavity_dim), space);
        Matrix dm = ops::embed_cavity(ops::displacement(-I_ * a, space.cavity_dim), space);
        Vector psi = dm * (cdm * (dp * (cdp * psi0.amplitudes)));
        out.push_back(psi.dot(sx * psi).real());
    }
    return out;
}

}  // namespace catcomp
