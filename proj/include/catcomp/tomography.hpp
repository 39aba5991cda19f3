#pragma once

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "catcomp/fit.hpp"
#include "catcomp/grids.hpp"
#include "catcomp/hilbert.hpp"

namespace catcomp {

namespace detail {

// Calls emit(n, k, f) with f = sqrt(n!/(n+k)!) |nu|^k e^{-|nu|^2/2} L_n^k(|nu|^2) for n + k < dim.
// Then <n+k|D|n> = f e^{ik arg nu} and <n|D|n+k> = f (-e^{-i arg nu})^k.
template <class Emit>
void laguerre_elements(cplx nu, int dim, Emit&& emit) {
    const double x = std::norm(nu);
    if (x == 0.0) {
        for (int n = 0; n < dim; ++n) emit(n, 0, 1.0);
        return;
    }
    const double lx = std::log(x);
    for (int k = 0; k < dim; ++k) {
        double fm = 0.0;
        double f = std::exp(0.5 * k * lx - 0.5 * x - 0.5 * std::lgamma(k + 1.0));
        emit(0, k, f);
        for (int n = 0; n + k + 1 < dim; ++n) {
            const double a = std::sqrt((n + 1.0) / (n + 1.0 + k));
            const double b = n > 0 ? std::sqrt(double(n) / (n + k)) : 0.0;
            const double fn = ((2.0 * n + 1.0 + k - x) * f - (n + k) * b * fm) * a / (n + 1.0);
            fm = f;
            f = fn;
            emit(n + 1, k, f);
        }
    }
}

}  // namespace detail

// Exact <m|D(nu)|n> for m, n < dim, from the normalised associated Laguerre form.
inline Matrix displacement_elements(cplx nu, int dim) {
    Matrix d = Matrix::Zero(dim, dim);
    const double ph = std::arg(nu);
    detail::laguerre_elements(nu, dim, [&](int n, int k, double f) {
        d(n + k, n) = f * std::polar(1.0, k * ph);
        if (k > 0) d(n, n + k) = f * std::polar(1.0, k * (M_PI - ph));
    });
    return d;
}

namespace detail {

inline cplx char_value_rho(const Matrix& rho, cplx nu) {
    const int dim = static_cast<int>(rho.rows());
    std::vector<cplx> up(dim), down(dim);
    const double ph = std::arg(nu);
    for (int k = 0; k < dim; ++k) {
        up[k] = std::polar(1.0, k * ph);
        down[k] = std::polar(1.0, k * (M_PI - ph));
    }
    cplx acc = 0.0;
    laguerre_elements(nu, dim, [&](int n, int k, double f) {
        acc += rho(n, n + k) * f * up[k];
        if (k > 0) acc += rho(n + k, n) * f * down[k];
    });
    return acc;
}

inline cplx char_value_psi(const Vector& psi, cplx nu) {
    const int dim = static_cast<int>(psi.size());
    std::vector<cplx> up(dim), down(dim);
    const double ph = std::arg(nu);
    for (int k = 0; k < dim; ++k) {
        up[k] = std::polar(1.0, k * ph);
        down[k] = std::polar(1.0, k * (M_PI - ph));
    }
    cplx acc = 0.0;
    laguerre_elements(nu, dim, [&](int n, int k, double f) {
        acc += std::conj(psi(n + k)) * psi(n) * f * up[k];
        if (k > 0) acc += std::conj(psi(n)) * psi(n + k) * f * down[k];
    });
    return acc;
}

// Trailing levels are dropped once their population is below tol; coherences with them are then below sqrt(tol).
inline int support_dim(const Vector& psi, double tol = 1e-28) {
    int d = static_cast<int>(psi.size());
    while (d > 1 && std::norm(psi(d - 1)) < tol) --d;
    return d;
}

inline int support_dim(const Matrix& rho, double tol = 1e-28) {
    int d = static_cast<int>(rho.rows());
    while (d > 1 && std::abs(rho(d - 1, d - 1)) < tol) --d;
    return d;
}

template <class Eval>
CharGrid sample_grid(const GridAxes& axes, Eval&& eval) {
    CharGrid g;
    g.re_axis = axes.re_axis;
    g.im_axis = axes.im_axis;
    const Eigen::Index r = static_cast<Eigen::Index>(axes.im_axis.size());
    const Eigen::Index c = static_cast<Eigen::Index>(axes.re_axis.size());
    g.values.resize(r, c);
    const bool sym = axis_symmetric(axes.re_axis, 1e-12) && axis_symmetric(axes.im_axis, 1e-12);
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < c; ++j) {
            const Eigen::Index mi = r - 1 - i, mj = c - 1 - j;
            if (sym && (mi * c + mj) < (i * c + j)) {
                g.values(i, j) = std::conj(g.values(mi, mj));
                continue;
            }
            g.values(i, j) = eval(cplx(axes.re_axis[j], axes.im_axis[i]));
        }
    }
    return g;
}

}  // namespace detail

inline cplx char_value(const PureState& psi, cplx nu) {
    if (psi.factor == Factor::composite) return detail::char_value_rho(cavity_reduced(psi).matrix, nu);
    if (psi.factor != Factor::cavity) throw std::invalid_argument("char_value: cavity state required");
    int d = detail::support_dim(psi.amplitudes);
    return detail::char_value_psi(psi.amplitudes.head(d), nu);
}

inline cplx char_value(const DensityMatrix& rho, cplx nu) {
    Matrix m = rho.factor == Factor::composite ? cavity_reduced(rho).matrix : rho.matrix;
    int d = detail::support_dim(m);
    return detail::char_value_rho(m.topLeftCorner(d, d), nu);
}

inline void check_char_coverage(const CharGrid& g) {
    if (g.values.rows() > 1 && g.values.cols() > 1 && g.edge_magnitude() > 0.02)
        warn("char_function: |C| at grid edge " + std::to_string(g.edge_magnitude()) + " exceeds 0.02");
}

inline CharGrid char_function(const PureState& psi, const GridAxes& axes, const std::string& label = {}) {
    CharGrid g;
    if (psi.factor == Factor::composite) {
        Matrix rho = cavity_reduced(psi).matrix;
        int d = detail::support_dim(rho);
        Matrix r = rho.topLeftCorner(d, d);
        g = detail::sample_grid(axes, [&](cplx nu) { return detail::char_value_rho(r, nu); });
    } else {
        if (psi.factor != Factor::cavity) throw std::invalid_argument("char_function: cavity state required");
        int d = detail::support_dim(psi.amplitudes);
        Vector v = psi.amplitudes.head(d);
        g = detail::sample_grid(axes, [&](cplx nu) { return detail::char_value_psi(v, nu); });
    }
    g.label = label;
    check_char_coverage(g);
    return g;
}

inline CharGrid char_function(const DensityMatrix& rho, const GridAxes& axes, const std::string& label = {}) {
    Matrix m = rho.factor == Factor::composite ? cavity_reduced(rho).matrix : rho.matrix;
    int d = detail::support_dim(m);
    Matrix r = m.topLeftCorner(d, d);
    CharGrid g = detail::sample_grid(axes, [&](cplx nu) { return detail::char_value_rho(r, nu); });
    g.label = label;
    check_char_coverage(g);
    return g;
}

inline CharGrid vacuum_char(const GridAxes& axes) {
    CharGrid g = detail::sample_grid(axes, [](cplx nu) { return cplx(std::exp(-0.5 * std::norm(nu)), 0.0); });
    g.label = "vacuum";
    return g;
}

// 2/pi sum_{mn} rho_nm <m|D(2 beta)|n> (-1)^n
inline double wigner_fock(const DensityMatrix& rho, cplx beta) {
    Matrix m = rho.factor == Factor::composite ? cavity_reduced(rho).matrix : rho.matrix;
    const int dim = static_cast<int>(m.rows());
    Matrix d = displacement_elements(2.0 * beta, dim);
    cplx acc = 0.0;
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) acc += m(b, a) * d(a, b) * ((b % 2 == 0) ? 1.0 : -1.0);
    return 2.0 / PI * acc.real();
}

// ------------------------------------------------------------------ Wigner transform

namespace detail {

inline std::vector<double> conjugate_axis(int m, double step) {
    std::vector<double> ax(m);
    for (int k = 0; k < m; ++k) ax[k] = double(k - m / 2) * PI / (double(m) * step);
    return ax;
}

inline int wrap(int k, int m) { return ((k % m) + m) % m; }

// out(l) = sum_j in(j) exp(sign 2 pi i l j / m), length m, l = 0..m-1.
inline void dft(std::vector<cplx>& data, int sign, Eigen::FFT<double>& fft) {
    std::vector<cplx> out;
    if (sign < 0) {
        fft.fwd(out, data);
    } else {
        fft.SetFlag(Eigen::FFT<double>::Unscaled);
        fft.inv(out, data);
        fft.ClearFlag(Eigen::FFT<double>::Unscaled);
    }
    data.swap(out);
}

}  // namespace detail

// W(beta) = 1/pi^2 int C(nu) e^{beta nu* - beta* nu} d^2 nu by zero-padded 2D DFT.
// The beta grid is conjugate to the nu grid: Re[beta] pairs with Im[nu] and Im[beta] with Re[nu],
// spacing pi / (M dnu) for padded length M.
inline WignerGrid wigner_from_char(const CharGrid& grid, int pad_factor = 4) {
    if (pad_factor < 1) throw std::invalid_argument("wigner_from_char: pad_factor must be >= 1");
    if (grid.re_axis.size() < 2 || grid.im_axis.size() < 2)
        throw std::invalid_argument("wigner_from_char: two-dimensional grid required");
    if (!axis_uniform(grid.re_axis) || !axis_uniform(grid.im_axis))
        throw std::invalid_argument("wigner_from_char: axes must be uniform");
    const int nr = static_cast<int>(grid.re_axis.size()), ni = static_cast<int>(grid.im_axis.size());
    const double du = grid.d_re(), dv = grid.d_im();
    const double u0 = grid.re_axis.front(), v0 = grid.im_axis.front();

    const int mr = pad_factor * nr, mi = pad_factor * ni;
    Eigen::FFT<double> fft;
    // rows: sum over Re[nu] with kernel e^{+2 i y u}
    Matrix a = Matrix::Zero(ni, mr);
    std::vector<cplx> buf;
    for (int i = 0; i < ni; ++i) {
        buf.assign(mr, 0.0);
        for (int j = 0; j < nr; ++j) buf[j] = grid.values(i, j);
        detail::dft(buf, +1, fft);
        for (int l = 0; l < mr; ++l) a(i, l) = buf[l];
    }
    // columns: sum over Im[nu] with kernel e^{-2 i x v}
    Matrix b = Matrix::Zero(mi, mr);
    for (int l = 0; l < mr; ++l) {
        buf.assign(mi, 0.0);
        for (int i = 0; i < ni; ++i) buf[i] = a(i, l);
        detail::dft(buf, -1, fft);
        for (int k = 0; k < mi; ++k) b(k, l) = buf[k];
    }
    WignerGrid w;
    w.pad_factor = pad_factor;
    w.re_axis = detail::conjugate_axis(mi, dv);
    w.im_axis = detail::conjugate_axis(mr, du);
    w.source_re_axis = grid.re_axis;
    w.source_im_axis = grid.im_axis;
    w.label = grid.label;
    w.time = grid.time;
    w.values.resize(mr, mi);
    const double scale = du * dv / (PI * PI);
    double resid = 0.0;
    for (int l = 0; l < mr; ++l) {
        const double y = w.im_axis[l];
        const int lw = detail::wrap(l - mr / 2, mr);
        for (int k = 0; k < mi; ++k) {
            const double x = w.re_axis[k];
            const int kw = detail::wrap(k - mi / 2, mi);
            cplx val = scale * std::polar(1.0, 2.0 * y * u0 - 2.0 * x * v0) * b(kw, lw);
            w.values(l, k) = val.real();
            resid = std::max(resid, std::abs(val.imag()));
        }
    }
    w.imag_residue = resid;
    // A Wigner function that has not decayed at the border of the conjugate grid is aliased.
    {
        const double peak = w.values.cwiseAbs().maxCoeff();
        double edge = 0;
        edge = std::max({w.values.row(0).cwiseAbs().maxCoeff(), w.values.row(mr - 1).cwiseAbs().maxCoeff(),
                         w.values.col(0).cwiseAbs().maxCoeff(), w.values.col(mi - 1).cwiseAbs().maxCoeff()});
        if (peak > 0 && edge > 1e-3 * peak)
            throw std::invalid_argument("wigner_from_char: char grid spacing too coarse, Wigner aliased at the border");
    }
    if (resid > 1e-8) warn("wigner_from_char: imaginary residue " + std::to_string(resid));
    return w;
}

// Inverse transform C(nu) = int W(beta) e^{nu beta* - nu* beta} d^2 beta, sampled on the source axes.
inline CharGrid char_from_wigner(const WignerGrid& w) {
    const int mr = static_cast<int>(w.im_axis.size()), mi = static_cast<int>(w.re_axis.size());
    const int nr = static_cast<int>(w.source_re_axis.size()), ni = static_cast<int>(w.source_im_axis.size());
    if (nr < 2 || ni < 2) throw std::invalid_argument("char_from_wigner: source axes missing");
    const double dx = axis_step(w.re_axis), dy = axis_step(w.im_axis);
    const double u0 = w.source_re_axis.front(), v0 = w.source_im_axis.front();
    Eigen::FFT<double> fft;
    // Undo the output phases, then invert both index sums.
    Matrix b(mi, mr);
    for (int l = 0; l < mr; ++l) {
        const int lw = detail::wrap(l - mr / 2, mr);
        for (int k = 0; k < mi; ++k) {
            const int kw = detail::wrap(k - mi / 2, mi);
            b(kw, lw) = w.values(l, k) * std::polar(1.0, -2.0 * w.im_axis[l] * u0 + 2.0 * w.re_axis[k] * v0);
        }
    }
    std::vector<cplx> buf;
    Matrix a(mi, mr);
    for (int l = 0; l < mr; ++l) {
        buf.assign(mi, 0.0);
        for (int k = 0; k < mi; ++k) buf[k] = b(k, l);
        detail::dft(buf, +1, fft);
        for (int i = 0; i < mi; ++i) a(i, l) = buf[i];
    }
    CharGrid g;
    g.re_axis = w.source_re_axis;
    g.im_axis = w.source_im_axis;
    g.label = w.label;
    g.time = w.time;
    g.values.resize(ni, nr);
    for (int i = 0; i < ni; ++i) {
        buf.assign(mr, 0.0);
        for (int l = 0; l < mr; ++l) buf[l] = a(i, l);
        detail::dft(buf, -1, fft);
        for (int j = 0; j < nr; ++j) g.values(i, j) = dx * dy * buf[j];
    }
    return g;
}

// ------------------------------------------------------------------ parity and fidelity

inline double parity_from_char(const CharGrid& grid) {
    const double edge = grid.edge_magnitude();
    if (edge > 0.05) throw std::invalid_argument("parity_from_char: |C| at grid edge " + std::to_string(edge) + " > 0.05");
    if (edge > 0.02) warn("parity_from_char: |C| at grid edge " + std::to_string(edge));
    CharGrid vac = vacuum_char(grid.axes());
    const double c_norm = vac.values.sum().real();
    return grid.values.sum().real() / c_norm;
}

inline double parity_from_wigner(const WignerGrid& w) {
    CharGrid vac = vacuum_char({w.source_re_axis, w.source_im_axis});
    WignerGrid wv = wigner_from_char(vac, w.pad_factor);
    return w.at_origin() / wv.at_origin();
}

struct OverlapResult {
    double fidelity = 0;
    double imag_residue = 0;
};

// F = 1/pi sum C_ideal C_exp* dnu^2
inline OverlapResult overlap_fidelity_char(const CharGrid& ideal, const CharGrid& exp) {
    if (!axes_equal(ideal.re_axis, exp.re_axis) || !axes_equal(ideal.im_axis, exp.im_axis))
        throw std::invalid_argument("overlap_fidelity_char: axis mismatch");
    cplx s = ideal.values.cwiseProduct(exp.values.conjugate()).sum() * ideal.cell() / PI;
    if (std::abs(s.imag()) > 1e-3) warn("overlap_fidelity_char: imaginary residue " + std::to_string(s.imag()));
    return {s.real(), std::abs(s.imag())};
}

// ------------------------------------------------------------------ blobs

struct BlobFit {
    double amplitude = 0;  // |height|
    double signed_amplitude = 0;
    double center = 0;
    double sigma = 0;
    std::string method;  // "fit", "max_fallback", "no_blob"
};

// sign > 0 or < 0 restricts the search to extrema of that sign.
inline BlobFit blob_amplitude(const std::vector<double>& axis, const std::vector<double>& cut, double center_guess,
                              double window, int sign = 0) {
    if (axis.size() != cut.size()) throw std::invalid_argument("blob_amplitude: axis/cut length mismatch");
    std::vector<double> xs, ys;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < axis.size(); ++i)
        if (std::abs(axis[i] - center_guess) <= window + 1e-12) {
            xs.push_back(axis[i]);
            ys.push_back(cut[i]);
            idx.push_back(i);
        }
    if (xs.empty()) throw std::invalid_argument("blob_amplitude: empty window");
    std::size_t im = 0;
    auto score = [&](double y) { return sign == 0 ? std::abs(y) : (sign > 0 ? y : -y); };
    for (std::size_t i = 1; i < ys.size(); ++i)
        if (score(ys[i]) > score(ys[im])) im = i;
    const bool interior = im > 0 && im + 1 < ys.size() && score(ys[im]) > 0;
    BlobFit out;
    if (xs.size() >= 4 && score(ys[im]) > 0) {
        fit::Gaussian g = fit::fit_gaussian(xs, ys, ys[im], xs[im], 0.5 * window);
        const bool accept = g.ok && std::abs(g.center - center_guess) <= window && g.sigma > 1e-3 &&
                            g.sigma <= 2.0 * window && (g.amplitude > 0) == (ys[im] > 0);
        if (accept) {
            out.amplitude = std::abs(g.amplitude);
            out.signed_amplitude = g.amplitude;
            out.center = g.center;
            out.sigma = g.sigma;
            out.method = "fit";
            return out;
        }
    }
    if (interior) {
        out.amplitude = std::abs(ys[im]);
        out.signed_amplitude = ys[im];
        out.center = xs[im];
        out.method = "max_fallback";
        return out;
    }
    out.center = center_guess;
    out.method = "no_blob";
    return out;
}

// ------------------------------------------------------------------ sub-Planck marginal

struct Marginal {
    std::vector<double> p_axis;
    std::vector<double> values;
    std::vector<double> vacuum_values;
    double vacuum_sigma = 0;
    double sigma = 0;
    double contrast = 0;
};

namespace detail {

inline std::vector<double> marginal_from_cut(const std::vector<double>& u, const Vector& c, const std::vector<double>& p) {
    const double du = axis_step(u);
    std::vector<double> out(p.size());
    for (std::size_t l = 0; l < p.size(); ++l) {
        cplx acc = 0.0;
        for (std::size_t j = 0; j < u.size(); ++j) acc += c(j) * std::polar(1.0, 2.0 * u[j] * p[l]);
        out[l] = (acc * du / PI).real();
    }
    return out;
}

inline double marginal_sigma(const std::vector<double>& p, const std::vector<double>& m) {
    double s0 = 0, s2 = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        s0 += m[i];
        s2 += p[i] * p[i] * m[i];
    }
    return s0 > 0 ? std::sqrt(std::max(0.0, s2 / s0)) : 0.0;
}

}  // namespace detail

// Central-fringe visibility (M_peak - M(0)) / (M_peak + M(0)), M_peak the first local maximum at p > 0
// with p <= search_width; 0 when there is none.
inline double fringe_contrast(const std::vector<double>& p, const std::vector<double>& m, double search_width) {
    int i0 = axis_index_of(p, 0.0, 1e-9);
    if (i0 < 0) throw std::invalid_argument("fringe_contrast: p=0 not on axis");
    const double w = search_width;
    for (int i = i0 + 1; i + 1 < static_cast<int>(p.size()) && p[i] <= w; ++i) {
        if (m[i] > m[i - 1] && m[i] >= m[i + 1]) {
            const double peak = m[i], center = m[i0];
            return (peak + center) > 0 ? (peak - center) / (peak + center) : 0.0;
        }
    }
    return 0.0;
}

// Momentum marginal over Im[beta] from the Im[nu]=0 cut: M(p) = 1/pi int C(u) e^{2 i u p} du.
inline Marginal subplanck_marginal(const CharGrid& grid, int pad_factor = 4) {
    Vector cut = grid.re_cut();
    if (grid.re_axis.size() < 3) throw std::invalid_argument("subplanck_marginal: cut too short");
    const int m = pad_factor * static_cast<int>(grid.re_axis.size());
    Marginal out;
    out.p_axis = detail::conjugate_axis(m, grid.d_re());
    out.values = detail::marginal_from_cut(grid.re_axis, cut, out.p_axis);
    Vector vac(grid.re_axis.size());
    for (std::size_t j = 0; j < grid.re_axis.size(); ++j) vac(j) = std::exp(-0.5 * grid.re_axis[j] * grid.re_axis[j]);
    out.vacuum_values = detail::marginal_from_cut(grid.re_axis, vac, out.p_axis);
    out.vacuum_sigma = detail::marginal_sigma(out.p_axis, out.vacuum_values);
    out.sigma = detail::marginal_sigma(out.p_axis, out.values);
    out.contrast = fringe_contrast(out.p_axis, out.values, 3.0 * out.vacuum_sigma);
    return out;
}

// Numerical marginal of a Wigner grid over Re[beta], on its Im[beta] axis.
inline std::vector<double> wigner_marginal_im(const WignerGrid& w) {
    std::vector<double> out(w.im_axis.size());
    const double dx = axis_step(w.re_axis);
    for (std::size_t l = 0; l < w.im_axis.size(); ++l) out[l] = w.values.row(l).sum() * dx;
    return out;
}

// ------------------------------------------------------------------ density reconstruction

struct Reconstruction {
    DensityMatrix rho;
    int iterations = 0;
    double objective = 0;
    bool converged = false;
};

// Euclidean projection of a Hermitian matrix onto {rho >= 0, tr rho = 1}.
inline Matrix project_density(const Matrix& h) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.adjoint()));
    Eigen::VectorXd lam = es.eigenvalues();
    const int n = static_cast<int>(lam.size());
    std::vector<double> s(lam.data(), lam.data() + n);
    std::sort(s.begin(), s.end(), std::greater<double>());
    double cum = 0, theta = 0;
    for (int k = 0; k < n; ++k) {
        cum += s[k];
        double t = (cum - 1.0) / double(k + 1);
        if (s[k] - t > 0) theta = t;
    }
    for (int k = 0; k < n; ++k) lam(k) = std::max(0.0, lam(k) - theta);
    return es.eigenvectors() * lam.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

// min sum_i |Tr(rho D(nu_i)) - C_i|^2 over density matrices of dimension `dim`, by accelerated projected gradient.
inline Reconstruction reconstruct_density(const CharGrid& samples, int dim = 20, int max_iter = 2000, double tol = 1e-10) {
    const Eigen::Index ns = samples.values.size();
    if (ns < Eigen::Index(dim) * dim) throw std::invalid_argument("reconstruct_density: need >= dim^2 samples");
    const int d2 = dim * dim;
    Matrix a(ns, d2);
    Vector c(ns);
    Eigen::Index row = 0;
    for (std::size_t i = 0; i < samples.im_axis.size(); ++i)
        for (std::size_t j = 0; j < samples.re_axis.size(); ++j, ++row) {
            Matrix d = displacement_elements(cplx(samples.re_axis[j], samples.im_axis[i]), dim);
            for (int p = 0; p < dim; ++p)
                for (int q = 0; q < dim; ++q) a(row, p * dim + q) = d(q, p);  // Tr(rho D) = sum rho_pq D_qp
            c(row) = samples.values(i, j);
        }
    Matrix ata = a.adjoint() * a;
    Vector atc = a.adjoint() * c;
    const double csq = c.squaredNorm();
    Eigen::SelfAdjointEigenSolver<Matrix> es(ata, Eigen::EigenvaluesOnly);
    const double lipschitz = es.eigenvalues().maxCoeff();
    auto objective = [&](const Vector& x) { return (x.dot(ata * x) - 2.0 * x.dot(atc)).real() + csq; };
    auto to_mat = [&](const Vector& x) {
        Matrix m(dim, dim);
        for (int p = 0; p < dim; ++p)
            for (int q = 0; q < dim; ++q) m(p, q) = x(p * dim + q);
        return m;
    };
    auto to_vec = [&](const Matrix& m) {
        Vector x(d2);
        for (int p = 0; p < dim; ++p)
            for (int q = 0; q < dim; ++q) x(p * dim + q) = m(p, q);
        return x;
    };
    Vector x = to_vec(Matrix::Identity(dim, dim) / double(dim));
    Vector y = x;
    double tk = 1.0, fprev = objective(x);
    Reconstruction out;
    for (int it = 1; it <= max_iter; ++it) {
        // d/d conj(x) of |A x - c|^2 is A^dag (A x - c)
        Vector grad = ata * y - atc;
        Matrix step = to_mat(y) - (1.0 / lipschitz) * to_mat(grad);
        Vector xn = to_vec(project_density(step));
        double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
        y = xn + ((tk - 1.0) / tn) * (xn - x);
        x = xn;
        tk = tn;
        double f = objective(x);
        out.iterations = it;
        if (std::abs(fprev - f) < tol * std::max(1.0, std::abs(f))) {
            out.converged = true;
            fprev = f;
            break;
        }
        if (f > fprev) {  // restart momentum on increase
            y = x;
            tk = 1.0;
        }
        fprev = f;
    }
    out.objective = fprev;
    SpaceSpec s(std::max(dim, 2));
    out.rho = {to_mat(x), s, Factor::cavity};
    return out;
}

}  // namespace catcomp
