#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "catcomp/diag.hpp"

namespace catcomp {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr cplx I_{0.0, 1.0};
inline constexpr double PI = 3.14159265358979323846;

// Frozen conventions: X=(a+a^dag)/2, P=i(a^dag-a)/2, vacuum variance 1/4,
// C(nu)=<D(nu)>, vacuum characteristic width 1.
struct Conventions {
    static constexpr double quadrature_scale = 0.5;
    static constexpr double vacuum_quadrature_variance = 0.25;
    static constexpr double vacuum_char_sigma = 1.0;
};

enum class Ordering { qubit_first, cavity_first };
enum class Factor { cavity, qubit, composite };

struct SpaceSpec {
    int cavity_dim = 60;
    int qubit_levels = 2;
    Ordering ordering = Ordering::qubit_first;

    SpaceSpec() = default;
    explicit SpaceSpec(int n, Ordering o = Ordering::qubit_first)
        : cavity_dim(n), ordering(o) { validate(); }

    int dim() const { return qubit_levels * cavity_dim; }
    int index(int q, int n) const {
        return ordering == Ordering::qubit_first ? q * cavity_dim + n : n * qubit_levels + q;
    }
    void validate() const {
        if (cavity_dim < 2) throw std::invalid_argument("SpaceSpec: cavity_dim must be >= 2");
        if (qubit_levels != 2) throw std::invalid_argument("SpaceSpec: qubit_levels is fixed at 2");
    }
    bool operator==(const SpaceSpec& o) const {
        return cavity_dim == o.cavity_dim && ordering == o.ordering;
    }
    int factor_dim(Factor f) const {
        switch (f) {
            case Factor::cavity: return cavity_dim;
            case Factor::qubit: return qubit_levels;
            default: return dim();
        }
    }
};

struct Operator {
    Matrix matrix;
    SpaceSpec space;
    Factor factor = Factor::cavity;
};

struct PureState {
    Vector amplitudes;
    SpaceSpec space;
    Factor factor = Factor::cavity;
};

struct DensityMatrix {
    Matrix matrix;
    SpaceSpec space;
    Factor factor = Factor::cavity;
};

namespace ops {

inline Matrix annihilation(int n) {
    Matrix a = Matrix::Zero(n, n);
    for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(double(k));
    return a;
}

inline Matrix creation(int n) { return annihilation(n).adjoint(); }

inline Matrix number(int n) {
    Matrix m = Matrix::Zero(n, n);
    for (int k = 0; k < n; ++k) m(k, k) = double(k);
    return m;
}

inline Matrix quad_x(int n) {
    Matrix a = annihilation(n);
    return Conventions::quadrature_scale * (a + a.adjoint());
}

inline Matrix quad_p(int n) {
    Matrix a = annihilation(n);
    return Conventions::quadrature_scale * I_ * (a.adjoint() - a);
}

inline Matrix parity(int n) {
    Matrix m = Matrix::Zero(n, n);
    for (int k = 0; k < n; ++k) m(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
    return m;
}

inline Matrix pauli_x() {
    Matrix m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

inline Matrix pauli_y() {
    Matrix m(2, 2);
    m << 0.0, -I_, I_, 0.0;
    return m;
}

inline Matrix pauli_z() {
    Matrix m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

// |e><e| - |g><g|
inline Matrix dispersive_z() { return -pauli_z(); }

// |g><e|
inline Matrix lowering() {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = 1.0;
    return m;
}

inline Matrix projector(int q) {
    Matrix m = Matrix::Zero(2, 2);
    m(q, q) = 1.0;
    return m;
}

inline Matrix displacement(cplx alpha, int n) {
    Matrix a = annihilation(n);
    Matrix g = alpha * a.adjoint() - std::conj(alpha) * a;
    return g.exp();
}

inline Matrix squeeze(double r, double theta, int n) {
    Matrix a = annihilation(n);
    cplx z = std::polar(r, theta);
    Matrix a2 = a * a;
    Matrix g = 0.5 * (std::conj(z) * a2 - z * a2.adjoint());
    return g.exp();
}

inline Matrix rotation_phase(double phi, int n) {
    Matrix m = Matrix::Zero(n, n);
    for (int k = 0; k < n; ++k) m(k, k) = std::polar(1.0, phi * k);
    return m;
}

// Qubit-factor and cavity-factor matrices combined according to the ordering.
inline Matrix kron(const Matrix& qubit, const Matrix& cavity, Ordering o) {
    if (o == Ordering::qubit_first) return Eigen::kroneckerProduct(qubit, cavity).eval();
    return Eigen::kroneckerProduct(cavity, qubit).eval();
}

inline Matrix embed_cavity(const Matrix& cavity, const SpaceSpec& s) {
    return kron(Matrix::Identity(2, 2), cavity, s.ordering);
}

inline Matrix embed_qubit(const Matrix& qubit, const SpaceSpec& s) {
    return kron(qubit, Matrix::Identity(s.cavity_dim, s.cavity_dim), s.ordering);
}

// Largest entry of U^dag U - I restricted to the lowest `keep` Fock levels of each qubit block.
inline double unitarity_defect(const Matrix& u, const SpaceSpec& s, Factor f, double keep_fraction = 0.9) {
    Matrix d = u.adjoint() * u - Matrix::Identity(u.rows(), u.cols());
    int keep = static_cast<int>(std::floor(keep_fraction * s.cavity_dim));
    double worst = 0.0;
    for (int i = 0; i < d.rows(); ++i) {
        for (int j = 0; j < d.cols(); ++j) {
            auto level = [&](int k) {
                if (f == Factor::qubit) return 0;
                if (f == Factor::cavity) return k;
                return s.ordering == Ordering::qubit_first ? k % s.cavity_dim : k / 2;
            };
            if (level(i) >= keep || level(j) >= keep) continue;
            worst = std::max(worst, std::abs(d(i, j)));
        }
    }
    return worst;
}

}  // namespace ops

enum class OpKind {
    annihilate, create, quad_X, quad_P, number, displacement, squeeze,
    parity, identity, pauli_x, pauli_y, pauli_z
};

inline void check_headroom(cplx alpha, int n, const char* who) {
    double m = std::abs(alpha);
    if (m * m + 5.0 * m > n)
        warn(std::string(who) + ": cavity_dim " + std::to_string(n) +
             " is small for |alpha|=" + std::to_string(m));
}

// params: displacement {alpha}; squeeze {r, theta}. Cavity kinds return cavity-factor operators,
// Pauli kinds return qubit-factor operators.
inline Operator make_operator(OpKind kind, const std::vector<cplx>& params, const SpaceSpec& space) {
    space.validate();
    const int n = space.cavity_dim;
    auto expect_params = [&](std::size_t k) {
        if (params.size() != k)
            throw std::invalid_argument("make_operator: expected " + std::to_string(k) + " parameter(s)");
    };
    switch (kind) {
        case OpKind::annihilate: expect_params(0); return {ops::annihilation(n), space, Factor::cavity};
        case OpKind::create: expect_params(0); return {ops::creation(n), space, Factor::cavity};
        case OpKind::quad_X: expect_params(0); return {ops::quad_x(n), space, Factor::cavity};
        case OpKind::quad_P: expect_params(0); return {ops::quad_p(n), space, Factor::cavity};
        case OpKind::number: expect_params(0); return {ops::number(n), space, Factor::cavity};
        case OpKind::parity: expect_params(0); return {ops::parity(n), space, Factor::cavity};
        case OpKind::identity: expect_params(0); return {Matrix::Identity(n, n), space, Factor::cavity};
        case OpKind::pauli_x: expect_params(0); return {ops::pauli_x(), space, Factor::qubit};
        case OpKind::pauli_y: expect_params(0); return {ops::pauli_y(), space, Factor::qubit};
        case OpKind::pauli_z: expect_params(0); return {ops::pauli_z(), space, Factor::qubit};
        case OpKind::displacement:
            expect_params(1);
            check_headroom(params[0], n, "displacement");
            return {ops::displacement(params[0], n), space, Factor::cavity};
        case OpKind::squeeze: {
            expect_params(2);
            if (std::abs(params[0].imag()) > 0 || std::abs(params[1].imag()) > 0)
                throw std::invalid_argument("make_operator: squeeze takes real (r, theta)");
            double r = params[0].real();
            if (r < 0) throw std::invalid_argument("make_operator: squeeze r must be >= 0");
            return {ops::squeeze(r, params[1].real(), n), space, Factor::cavity};
        }
    }
    throw std::invalid_argument("make_operator: unknown kind");
}

inline Operator embed(const Operator& op) {
    if (op.factor == Factor::composite) return op;
    if (op.factor == Factor::cavity) return {ops::embed_cavity(op.matrix, op.space), op.space, Factor::composite};
    return {ops::embed_qubit(op.matrix, op.space), op.space, Factor::composite};
}

// ---------------------------------------------------------------- states

enum class StateKind { vacuum, fock, coherent, cat, squeezed_cat, qubit };
enum class QubitLabel { g, e };

inline Vector coherent_amplitudes(cplx alpha, int n) {
    // Truncated Poisson amplitudes, renormalised on the retained levels.
    Vector v(n);
    cplx term = std::exp(-0.5 * std::norm(alpha));
    v(0) = term;
    for (int k = 1; k < n; ++k) {
        term *= alpha / std::sqrt(double(k));
        v(k) = term;
    }
    return v / v.norm();
}

inline Vector cat_amplitudes(cplx alpha, int parity, int n) {
    if (parity != 1 && parity != -1) throw std::invalid_argument("cat: parity must be +1 or -1");
    Vector v = coherent_amplitudes(alpha, n) + double(parity) * coherent_amplitudes(-alpha, n);
    double nv = v.norm();
    if (nv < 1e-8) throw std::invalid_argument("cat: degenerate input (odd cat with alpha=0)");
    return v / nv;
}

namespace state_params {
struct Cat { cplx alpha; int parity = 1; };
struct SqueezedCat { cplx gamma; double r = 0; double theta = 0; int parity = 1; };
}  // namespace state_params

inline PureState make_vacuum(const SpaceSpec& s) {
    Vector v = Vector::Zero(s.cavity_dim);
    v(0) = 1.0;
    return {v, s, Factor::cavity};
}

inline PureState make_fock(int k, const SpaceSpec& s) {
    if (k < 0 || k >= s.cavity_dim) throw std::invalid_argument("fock: level outside truncation");
    Vector v = Vector::Zero(s.cavity_dim);
    v(k) = 1.0;
    return {v, s, Factor::cavity};
}

inline PureState make_coherent(cplx alpha, const SpaceSpec& s) {
    check_headroom(alpha, s.cavity_dim, "coherent");
    return {coherent_amplitudes(alpha, s.cavity_dim), s, Factor::cavity};
}

inline PureState make_cat(cplx alpha, int parity, const SpaceSpec& s) {
    check_headroom(alpha, s.cavity_dim, "cat");
    return {cat_amplitudes(alpha, parity, s.cavity_dim), s, Factor::cavity};
}

inline PureState make_squeezed_cat(cplx gamma, double r, double theta, int parity, const SpaceSpec& s) {
    PureState c = make_cat(gamma, parity, s);
    Vector v = ops::squeeze(r, theta, s.cavity_dim) * c.amplitudes;
    double tail = v.tail(std::max(1, s.cavity_dim / 10)).squaredNorm();
    if (tail > 1e-6) warn("squeezed_cat: truncation corner population " + std::to_string(tail));
    return {v / v.norm(), s, Factor::cavity};
}

inline PureState make_squeezed_vacuum(double r, double theta, const SpaceSpec& s) {
    Vector v = ops::squeeze(r, theta, s.cavity_dim).col(0);
    return {v / v.norm(), s, Factor::cavity};
}

// Qubit state cos(t/2)|g> + e^{i phi} sin(t/2)|e>.
inline PureState make_qubit(double theta, double phi, const SpaceSpec& s) {
    Vector v(2);
    v(0) = std::cos(theta / 2);
    v(1) = std::polar(std::sin(theta / 2), phi);
    return {v, s, Factor::qubit};
}

inline PureState make_qubit(QubitLabel q, const SpaceSpec& s) {
    return make_qubit(q == QubitLabel::g ? 0.0 : PI, 0.0, s);
}

// Generic factory over StateKind. params:
//   fock {n}, coherent {alpha}, cat {alpha, parity}, squeezed_cat {gamma, r, theta, parity},
//   qubit {theta, phi} (Bloch angles; {0,0}=g, {pi,0}=e).
inline PureState make_state(StateKind kind, const std::vector<cplx>& p, const SpaceSpec& s) {
    s.validate();
    auto need = [&](std::size_t k) {
        if (p.size() != k) throw std::invalid_argument("make_state: expected " + std::to_string(k) + " parameter(s)");
    };
    auto as_parity = [](cplx c) {
        int par = static_cast<int>(std::lround(c.real()));
        if (par != 1 && par != -1) throw std::invalid_argument("make_state: parity must be +1 or -1");
        return par;
    };
    switch (kind) {
        case StateKind::vacuum: need(0); return make_vacuum(s);
        case StateKind::fock: need(1); return make_fock(static_cast<int>(std::lround(p[0].real())), s);
        case StateKind::coherent: need(1); return make_coherent(p[0], s);
        case StateKind::cat: need(2); return make_cat(p[0], as_parity(p[1]), s);
        case StateKind::squeezed_cat:
            need(4);
            return make_squeezed_cat(p[0], p[1].real(), p[2].real(), as_parity(p[3]), s);
        case StateKind::qubit: need(2); return make_qubit(p[0].real(), p[1].real(), s);
    }
    throw std::invalid_argument("make_state: unknown kind");
}

inline DensityMatrix to_density(const PureState& psi) {
    return {psi.amplitudes * psi.amplitudes.adjoint(), psi.space, psi.factor};
}

// ---------------------------------------------------------------- tensor

inline Operator tensor(const Operator& a, const Operator& b) {
    if (!(a.space == b.space)) throw std::invalid_argument("tensor: operands from different spaces");
    if (a.factor == Factor::qubit && b.factor == Factor::cavity)
        return {ops::kron(a.matrix, b.matrix, a.space.ordering), a.space, Factor::composite};
    if (a.factor == Factor::cavity && b.factor == Factor::qubit)
        return {ops::kron(b.matrix, a.matrix, a.space.ordering), a.space, Factor::composite};
    throw std::invalid_argument("tensor: operands must be one qubit factor and one cavity factor");
}

inline PureState tensor(const PureState& a, const PureState& b) {
    if (!(a.space == b.space)) throw std::invalid_argument("tensor: operands from different spaces");
    const PureState* q = nullptr;
    const PureState* c = nullptr;
    if (a.factor == Factor::qubit && b.factor == Factor::cavity) { q = &a; c = &b; }
    else if (a.factor == Factor::cavity && b.factor == Factor::qubit) { q = &b; c = &a; }
    else throw std::invalid_argument("tensor: operands must be one qubit factor and one cavity factor");
    if (q->amplitudes.size() != 2 || c->amplitudes.size() != a.space.cavity_dim)
        throw std::invalid_argument("tensor: dimension mismatch");
    Matrix qm = q->amplitudes;
    Matrix cm = c->amplitudes;
    Matrix v = ops::kron(qm, cm, a.space.ordering);
    return {v.col(0), a.space, Factor::composite};
}

// ---------------------------------------------------------------- functionals

inline void check_dims(Eigen::Index state_dim, const Operator& op) {
    if (op.matrix.rows() != state_dim || op.matrix.cols() != state_dim)
        throw std::invalid_argument("expectation: dimension mismatch");
}

inline Matrix lift_for(const Operator& op, Factor target) {
    if (op.factor == target) return op.matrix;
    if (target == Factor::composite) return embed(op).matrix;
    throw std::invalid_argument("expectation: operator factor incompatible with state");
}

inline cplx expectation(const PureState& psi, const Operator& op) {
    Matrix m = lift_for(op, psi.factor);
    check_dims(psi.amplitudes.size(), {m, op.space, psi.factor});
    return psi.amplitudes.dot(m * psi.amplitudes);
}

inline cplx expectation(const DensityMatrix& rho, const Operator& op) {
    Matrix m = lift_for(op, rho.factor);
    check_dims(rho.matrix.rows(), {m, op.space, rho.factor});
    return (rho.matrix * m).trace();
}

inline double state_fidelity(const PureState& a, const PureState& b) {
    if (a.amplitudes.size() != b.amplitudes.size()) throw std::invalid_argument("state_fidelity: dimension mismatch");
    return std::norm(a.amplitudes.dot(b.amplitudes));
}

inline double state_fidelity(const PureState& a, const DensityMatrix& b) {
    if (a.amplitudes.size() != b.matrix.rows()) throw std::invalid_argument("state_fidelity: dimension mismatch");
    double f = a.amplitudes.dot(b.matrix * a.amplitudes).real();
    return std::clamp(f, 0.0, 1.0);
}

inline double state_fidelity(const DensityMatrix& a, const PureState& b) { return state_fidelity(b, a); }

inline double state_fidelity(const DensityMatrix&, const DensityMatrix&) {
    throw std::invalid_argument("state_fidelity: mixed-mixed fidelity is unsupported");
}

// Cavity reduced state of a composite pure state.
inline DensityMatrix cavity_reduced(const PureState& psi) {
    if (psi.factor == Factor::cavity) return to_density(psi);
    if (psi.factor != Factor::composite) throw std::invalid_argument("cavity_reduced: qubit-only state");
    const SpaceSpec& s = psi.space;
    Matrix r(2, s.cavity_dim);
    for (int q = 0; q < 2; ++q)
        for (int n = 0; n < s.cavity_dim; ++n) r(q, n) = psi.amplitudes(s.index(q, n));
    return {r.transpose() * r.conjugate(), s, Factor::cavity};
}

inline DensityMatrix cavity_reduced(const DensityMatrix& rho) {
    if (rho.factor == Factor::cavity) return rho;
    if (rho.factor != Factor::composite) throw std::invalid_argument("cavity_reduced: qubit-only state");
    const SpaceSpec& s = rho.space;
    Matrix out = Matrix::Zero(s.cavity_dim, s.cavity_dim);
    for (int q = 0; q < 2; ++q)
        for (int m = 0; m < s.cavity_dim; ++m)
            for (int n = 0; n < s.cavity_dim; ++n) out(m, n) += rho.matrix(s.index(q, m), s.index(q, n));
    return {out, s, Factor::cavity};
}

inline Matrix qubit_reduced(const DensityMatrix& rho) {
    const SpaceSpec& s = rho.space;
    Matrix out = Matrix::Zero(2, 2);
    for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q)
            for (int n = 0; n < s.cavity_dim; ++n) out(p, q) += rho.matrix(s.index(p, n), s.index(q, n));
    return out;
}

inline double purity(const DensityMatrix& rho) { return (rho.matrix * rho.matrix).trace().real(); }

inline double quadrature_variance(const DensityMatrix& rho, bool x_quadrature) {
    int n = rho.space.cavity_dim;
    Matrix q = x_quadrature ? ops::quad_x(n) : ops::quad_p(n);
    double m1 = (rho.matrix * q).trace().real();
    double m2 = (rho.matrix * q * q).trace().real();
    return m2 - m1 * m1;
}

// 10 log10(Var/Var_vac).
inline double quadrature_db(const DensityMatrix& rho, bool x_quadrature) {
    return 10.0 * std::log10(quadrature_variance(rho, x_quadrature) / Conventions::vacuum_quadrature_variance);
}

inline double squeeze_r_from_db(double db) { return -db / (20.0 * std::log10(std::exp(1.0))); }
inline double db_from_squeeze_r(double r) { return -20.0 * r * std::log10(std::exp(1.0)); }

// Smallest eigenvalue, Hermiticity defect and trace defect.
struct DensityCheck {
    double min_eigenvalue;
    double hermiticity;
    double trace_error;
};

inline DensityCheck check_density(const DensityMatrix& rho) {
    Matrix h = 0.5 * (rho.matrix + rho.matrix.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    return {es.eigenvalues().minCoeff(), (rho.matrix - rho.matrix.adjoint()).cwiseAbs().maxCoeff(),
            std::abs(rho.matrix.trace() - 1.0)};
}

}  // namespace catcomp
