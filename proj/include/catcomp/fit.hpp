#pragma once

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace catcomp::fit {

using Residual = std::function<void(const Eigen::VectorXd& p, Eigen::VectorXd& r)>;

struct LmResult {
    Eigen::VectorXd params;
    double rss = 0;
    bool ok = false;
};

namespace detail {
struct Functor {
    using Scalar = double;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;
    const Residual* f;
    int n_in, n_out;
    int inputs() const { return n_in; }
    int values() const { return n_out; }
    int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r) const {
        (*f)(x, r);
        return 0;
    }
};
}  // namespace detail

inline LmResult levenberg_marquardt(const Residual& f, Eigen::VectorXd p0, int n_residuals) {
    if (n_residuals < p0.size()) return {p0, std::numeric_limits<double>::infinity(), false};
    detail::Functor fun{&f, static_cast<int>(p0.size()), n_residuals};
    Eigen::NumericalDiff<detail::Functor> nd(fun);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<detail::Functor>, double> lm(nd);
    lm.parameters.maxfev = 4000;
    lm.parameters.xtol = 1e-12;
    lm.parameters.ftol = 1e-12;
    int info = lm.minimize(p0);
    Eigen::VectorXd r(n_residuals);
    f(p0, r);
    bool finite = p0.allFinite() && r.allFinite();
    return {p0, r.squaredNorm(), finite && info >= 1 && info <= 4};
}

// ---------------------------------------------------------------- Gaussian bump

struct Gaussian {
    double amplitude = 0, center = 0, sigma = 1;
    double rss = 0;
    bool ok = false;
};

// A exp(-(x - m)^2 / (2 s^2)), optionally with m fixed.
inline Gaussian fit_gaussian(const std::vector<double>& x, const std::vector<double>& y, double a0, double m0,
                             double s0, bool fix_center = false) {
    const int n = static_cast<int>(x.size());
    Gaussian g;
    if (n < (fix_center ? 2 : 3)) return g;
    if (fix_center) {
        Residual f = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
            for (int i = 0; i < n; ++i) r(i) = p(0) * std::exp(-0.5 * std::pow((x[i] - m0) / p(1), 2)) - y[i];
        };
        Eigen::VectorXd p(2);
        p << a0, s0;
        auto res = levenberg_marquardt(f, p, n);
        return {res.params(0), m0, std::abs(res.params(1)), res.rss, res.ok};
    }
    Residual f = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
        for (int i = 0; i < n; ++i) r(i) = p(0) * std::exp(-0.5 * std::pow((x[i] - p(1)) / p(2), 2)) - y[i];
    };
    Eigen::VectorXd p(3);
    p << a0, m0, s0;
    auto res = levenberg_marquardt(f, p, n);
    return {res.params(0), res.params(1), std::abs(res.params(2)), res.rss, res.ok};
}

// ---------------------------------------------------------------- exponential decay

enum class Offset { nonnegative, free, none };

inline const char* offset_name(Offset o) {
    switch (o) {
        case Offset::nonnegative: return "nonnegative";
        case Offset::free: return "free";
        default: return "none";
    }
}

struct ExpFit {
    double amplitude = 0, rate = 0, offset = 0;
    double rss = 0;
    bool ok = false;
    double tau() const { return rate > 0 ? 1.0 / rate : std::numeric_limits<double>::infinity(); }
};

namespace detail {

// Linear least squares for (A, c) at fixed rate k under the offset mode.
inline ExpFit solve_linear(const std::vector<double>& t, const std::vector<double>& y, double k, Offset mode) {
    const std::size_t n = t.size();
    double see = 0, se = 0, sy = 0, sey = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double e = std::exp(-k * t[i]);
        see += e * e;
        se += e;
        sy += y[i];
        sey += e * y[i];
        syy += y[i] * y[i];
    }
    auto rss_of = [&](double a, double c) {
        double r = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double d = a * std::exp(-k * t[i]) + c - y[i];
            r += d * d;
        }
        return r;
    };
    ExpFit f;
    f.rate = k;
    auto no_offset = [&]() {
        f.amplitude = see > 0 ? sey / see : 0.0;
        f.offset = 0.0;
    };
    if (mode == Offset::none) {
        no_offset();
    } else {
        const double det = see * double(n) - se * se;
        if (std::abs(det) < 1e-14 * std::max(1.0, see * double(n))) {
            // exp(-k t) nearly constant: the amplitude absorbs the level
            no_offset();
        } else {
            f.amplitude = (sey * double(n) - se * sy) / det;
            f.offset = (see * sy - se * sey) / det;
            if (mode == Offset::nonnegative && f.offset < 0) no_offset();
        }
    }
    f.rss = rss_of(f.amplitude, f.offset);
    (void)syy;
    return f;
}

}  // namespace detail

// A e^{-k t} + c by variable projection: (A, c) solved linearly, k by grid scan plus golden refinement.
inline ExpFit fit_exponential(const std::vector<double>& t, const std::vector<double>& y, Offset mode = Offset::nonnegative) {
    if (t.size() != y.size() || t.size() < 3) throw std::invalid_argument("fit_exponential: need >= 3 points");
    const double span = *std::max_element(t.begin(), t.end()) - *std::min_element(t.begin(), t.end());
    if (!(span > 0)) throw std::invalid_argument("fit_exponential: zero time span");
    std::vector<double> ks{0.0};
    for (int i = 0; i <= 240; ++i) ks.push_back(std::pow(10.0, -4.0 + 6.0 * i / 240.0) / span);
    std::vector<double> rss(ks.size());
    std::size_t best = 0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        rss[i] = detail::solve_linear(t, y, ks[i], mode).rss;
        if (rss[i] < rss[best] * (1 - 1e-12)) best = i;
    }
    double lo = best > 0 ? ks[best - 1] : 0.0;
    double hi = best + 1 < ks.size() ? ks[best + 1] : ks[best];
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = detail::solve_linear(t, y, c, mode).rss, fd = detail::solve_linear(t, y, d, mode).rss;
    for (int it = 0; it < 200 && (b - a) > 1e-14 * std::max(1.0 / span, b); ++it) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - g * (b - a);
            fc = detail::solve_linear(t, y, c, mode).rss;
        } else {
            a = c; c = d; fc = fd;
            d = a + g * (b - a);
            fd = detail::solve_linear(t, y, d, mode).rss;
        }
    }
    double kbest = 0.5 * (a + b);
    ExpFit f = detail::solve_linear(t, y, ks[best], mode);
    ExpFit refined = detail::solve_linear(t, y, kbest, mode);
    if (refined.rss < f.rss * (1 - 1e-12)) f = refined;
    f.ok = std::isfinite(f.rss) && best + 1 < ks.size();
    return f;
}

struct BootstrapStats {
    double se_amplitude = 0, se_rate = 0, se_offset = 0, se_tau = 0;
    int resamples = 0;
    unsigned long long seed = 0;
};

// Pair bootstrap of the exponential fit with a recorded seed.
inline BootstrapStats bootstrap_exponential(const std::vector<double>& t, const std::vector<double>& y, Offset mode,
                                            int resamples, unsigned long long seed) {
    BootstrapStats s;
    s.seed = seed;
    if (resamples <= 1) return s;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, t.size() - 1);
    std::vector<double> as, ks, cs, taus;
    for (int r = 0; r < resamples; ++r) {
        std::vector<double> tt, yy;
        for (std::size_t i = 0; i < t.size(); ++i) {
            std::size_t j = pick(rng);
            tt.push_back(t[j]);
            yy.push_back(y[j]);
        }
        std::vector<double> uniq = tt;
        std::sort(uniq.begin(), uniq.end());
        if (std::unique(uniq.begin(), uniq.end()) - uniq.begin() < 3) continue;
        ExpFit f = fit_exponential(tt, yy, mode);
        as.push_back(f.amplitude);
        ks.push_back(f.rate);
        cs.push_back(f.offset);
        if (f.rate > 0) taus.push_back(1.0 / f.rate);
    }
    auto sd = [](const std::vector<double>& v) {
        if (v.size() < 2) return 0.0;
        double m = 0;
        for (double x : v) m += x;
        m /= double(v.size());
        double q = 0;
        for (double x : v) q += (x - m) * (x - m);
        return std::sqrt(q / double(v.size() - 1));
    };
    s.se_amplitude = sd(as);
    s.se_rate = sd(ks);
    s.se_offset = sd(cs);
    s.se_tau = sd(taus);
    s.resamples = static_cast<int>(as.size());
    return s;
}

// ---------------------------------------------------------------- line and cosine

struct Line {
    double slope = 0, intercept = 0, se_slope = 0;
};

inline Line fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("fit_line: need >= 2 points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) { mx += x[i]; my += y[i]; }
    mx /= double(n);
    my /= double(n);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0) throw std::invalid_argument("fit_line: degenerate abscissae");
    Line l;
    l.slope = sxy / sxx;
    l.intercept = my - l.slope * mx;
    if (n > 2) {
        double rss = 0;
        for (std::size_t i = 0; i < n; ++i) rss += std::pow(y[i] - l.intercept - l.slope * x[i], 2);
        l.se_slope = std::sqrt(rss / double(n - 2) / sxx);
    }
    return l;
}

struct Cosine {
    double amplitude = 0, frequency = 0, phase = 0, offset = 0;
    double rss = 0;
    bool ok = false;
};

// A cos(2 pi f x + phi) + c. The frequency is seeded by a scan over [f_lo, f_hi].
inline Cosine fit_cosine(const std::vector<double>& x, const std::vector<double>& y, double f_lo, double f_hi) {
    const int n = static_cast<int>(x.size());
    if (n < 5) throw std::invalid_argument("fit_cosine: need >= 5 points");
    auto linear_at = [&](double f, Eigen::Vector3d& coef) {
        Eigen::MatrixXd a(n, 3);
        Eigen::VectorXd b(n);
        for (int i = 0; i < n; ++i) {
            a(i, 0) = std::cos(2 * M_PI * f * x[i]);
            a(i, 1) = std::sin(2 * M_PI * f * x[i]);
            a(i, 2) = 1.0;
            b(i) = y[i];
        }
        coef = a.colPivHouseholderQr().solve(b);
        return (a * coef - b).squaredNorm();
    };
    double bestf = f_lo, bestr = std::numeric_limits<double>::infinity();
    Eigen::Vector3d coef;
    for (int i = 0; i <= 400; ++i) {
        double f = f_lo + (f_hi - f_lo) * i / 400.0;
        double r = linear_at(f, coef);
        if (r < bestr) { bestr = r; bestf = f; }
    }
    linear_at(bestf, coef);
    Residual res = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
        for (int i = 0; i < n; ++i) r(i) = p(0) * std::cos(2 * M_PI * p(1) * x[i] + p(2)) + p(3) - y[i];
    };
    Eigen::VectorXd p(4);
    p << std::hypot(coef(0), coef(1)), bestf, std::atan2(-coef(1), coef(0)), coef(2);
    auto lm = levenberg_marquardt(res, p, n);
    Cosine c{lm.params(0), lm.params(1), lm.params(2), lm.params(3), lm.rss, lm.ok};
    if (c.amplitude < 0) {
        c.amplitude = -c.amplitude;
        c.phase += M_PI;
    }
    return c;
}

}  // namespace catcomp::fit
