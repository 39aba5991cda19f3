#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "catcomp/hilbert.hpp"

namespace catcomp {

inline std::vector<double> linspace(double a, double b, int n) {
    if (n < 1) throw std::invalid_argument("linspace: n must be >= 1");
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = a;
        return v;
    }
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * double(i) / double(n - 1);
    return v;
}

inline double axis_step(const std::vector<double>& ax) {
    return ax.size() > 1 ? (ax.back() - ax.front()) / double(ax.size() - 1) : 1.0;
}

inline bool axis_uniform(const std::vector<double>& ax, double tol = 1e-9) {
    if (ax.size() < 3) return true;
    double d = axis_step(ax);
    for (std::size_t i = 1; i < ax.size(); ++i)
        if (std::abs(ax[i] - ax[i - 1] - d) > tol * std::max(1.0, std::abs(d))) return false;
    return true;
}

inline bool axis_symmetric(const std::vector<double>& ax, double tol = 1e-12) {
    const std::size_t n = ax.size();
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(ax[i] + ax[n - 1 - i]) > tol) return false;
    return true;
}

inline bool axes_equal(const std::vector<double>& a, const std::vector<double>& b, double tol = 1e-12) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > tol) return false;
    return true;
}

// Index of the sample equal to `x`, or -1.
inline int axis_index_of(const std::vector<double>& ax, double x, double tol = 1e-9) {
    for (std::size_t i = 0; i < ax.size(); ++i)
        if (std::abs(ax[i] - x) <= tol) return static_cast<int>(i);
    return -1;
}

struct GridAxes {
    std::vector<double> re_axis;
    std::vector<double> im_axis;

    static GridAxes square(double lo, double hi, int n) { return {linspace(lo, hi, n), linspace(lo, hi, n)}; }
    static GridAxes re_cut(double lo, double hi, int n) { return {linspace(lo, hi, n), {0.0}}; }
    static GridAxes im_cut(double lo, double hi, int n) { return {{0.0}, linspace(lo, hi, n)}; }
};

// values(i, j) = C(re_axis[j] + i im_axis[i])
struct CharGrid {
    std::vector<double> re_axis;
    std::vector<double> im_axis;
    Matrix values;
    std::string label;
    double time = 0.0;

    GridAxes axes() const { return {re_axis, im_axis}; }
    double d_re() const { return axis_step(re_axis); }
    double d_im() const { return axis_step(im_axis); }
    double cell() const { return (re_axis.size() > 1 ? d_re() : 1.0) * (im_axis.size() > 1 ? d_im() : 1.0); }

    double edge_magnitude() const {
        const Eigen::Index r = values.rows(), c = values.cols();
        double m = 0.0;
        if (c > 1)
            for (Eigen::Index i = 0; i < r; ++i)
                m = std::max({m, std::abs(values(i, 0)), std::abs(values(i, c - 1))});
        if (r > 1)
            for (Eigen::Index j = 0; j < c; ++j)
                m = std::max({m, std::abs(values(0, j)), std::abs(values(r - 1, j))});
        return m;
    }

    // Row with Im[nu]=0, as a real-axis cut.
    Vector re_cut() const {
        int i0 = axis_index_of(im_axis, 0.0);
        if (i0 < 0) throw std::invalid_argument("CharGrid: Im[nu]=0 row not on grid");
        return values.row(i0).transpose();
    }

    Vector im_cut() const {
        int j0 = axis_index_of(re_axis, 0.0);
        if (j0 < 0) throw std::invalid_argument("CharGrid: Re[nu]=0 column not on grid");
        return values.col(j0);
    }

    cplx at_origin() const {
        int i0 = axis_index_of(im_axis, 0.0), j0 = axis_index_of(re_axis, 0.0);
        if (i0 < 0 || j0 < 0) throw std::invalid_argument("CharGrid: origin not on grid");
        return values(i0, j0);
    }

    double hermitian_defect() const {
        if (!axis_symmetric(re_axis) || !axis_symmetric(im_axis)) return 0.0;
        const Eigen::Index r = values.rows(), c = values.cols();
        double m = 0.0;
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < c; ++j)
                m = std::max(m, std::abs(values(i, j) - std::conj(values(r - 1 - i, c - 1 - j))));
        return m;
    }
};

// values(i, j) = W(re_axis[j] + i im_axis[i])
struct WignerGrid {
    std::vector<double> re_axis;
    std::vector<double> im_axis;
    Eigen::MatrixXd values;
    int pad_factor = 1;
    double imag_residue = 0.0;
    std::vector<double> source_re_axis;
    std::vector<double> source_im_axis;
    std::string label;
    double time = 0.0;

    double cell() const { return axis_step(re_axis) * axis_step(im_axis); }
    double integral() const { return values.sum() * cell(); }
    double at_origin() const {
        int i0 = axis_index_of(im_axis, 0.0, 1e-9), j0 = axis_index_of(re_axis, 0.0, 1e-9);
        if (i0 < 0 || j0 < 0) throw std::invalid_argument("WignerGrid: origin not on grid");
        return values(i0, j0);
    }
};

enum class Interpolation { bilinear, cubic };

namespace detail {

// Stencil weights on a uniform axis for coordinate x. Returns false outside the axis.
struct Stencil {
    int first = 0;
    int count = 0;
    double w[4] = {0, 0, 0, 0};
};

inline bool make_stencil(const std::vector<double>& ax, double x, Interpolation mode, Stencil& s) {
    const int n = static_cast<int>(ax.size());
    if (n == 1) {
        if (std::abs(x - ax[0]) > 1e-12) return false;
        s.first = 0;
        s.count = 1;
        s.w[0] = 1.0;
        return true;
    }
    const double d = axis_step(ax);
    double u = (x - ax[0]) / d;
    if (u < -1e-12 || u > n - 1 + 1e-12) return false;
    u = std::clamp(u, 0.0, double(n - 1));
    int i = std::min(static_cast<int>(std::floor(u)), n - 2);
    double t = u - i;
    if (mode == Interpolation::cubic && i >= 1 && i + 2 <= n - 1) {
        s.first = i - 1;
        s.count = 4;
        s.w[0] = -t * (t - 1) * (t - 2) / 6.0;
        s.w[1] = (t + 1) * (t - 1) * (t - 2) / 2.0;
        s.w[2] = -(t + 1) * t * (t - 2) / 2.0;
        s.w[3] = (t + 1) * t * (t - 1) / 6.0;
        return true;
    }
    s.first = i;
    s.count = 2;
    s.w[0] = 1.0 - t;
    s.w[1] = t;
    return true;
}

}  // namespace detail

// Interpolated C(x + i y); sets `inside` false (and returns 0) outside the grid.
inline cplx interpolate(const CharGrid& g, double x, double y, Interpolation mode, bool& inside) {
    detail::Stencil sx, sy;
    inside = detail::make_stencil(g.re_axis, x, mode, sx) && detail::make_stencil(g.im_axis, y, mode, sy);
    if (!inside) return 0.0;
    cplx acc = 0.0;
    for (int a = 0; a < sy.count; ++a)
        for (int b = 0; b < sx.count; ++b) acc += sy.w[a] * sx.w[b] * g.values(sy.first + a, sx.first + b);
    return acc;
}

}  // namespace catcomp
