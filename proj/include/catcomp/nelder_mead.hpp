#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <functional>
#include <numeric>
#include <vector>

namespace catcomp {

struct NelderMeadOptions {
    int max_evals = 3000;
    double initial_step = 0.25;
    double f_tol = 1e-12;
    double x_tol = 1e-9;
    int rebuilds = 2;  // fresh simplex around the best point after convergence
};

struct NelderMeadResult {
    Eigen::VectorXd x;
    double f = 0;
    int evals = 0;
};

inline NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x0,
                                    const NelderMeadOptions& opt = {}) {
    const int n = static_cast<int>(x0.size());
    int evals = 0;
    auto eval = [&](const Eigen::VectorXd& x) {
        ++evals;
        return f(x);
    };
    Eigen::VectorXd best = x0;
    double fbest = eval(x0);
    for (int round = 0; round <= opt.rebuilds && evals < opt.max_evals; ++round) {
        std::vector<Eigen::VectorXd> pts(n + 1, best);
        std::vector<double> fv(n + 1, fbest);
        for (int i = 0; i < n; ++i) {
            pts[i + 1](i) += opt.initial_step;
            fv[i + 1] = eval(pts[i + 1]);
        }
        std::vector<int> idx(n + 1);
        while (evals < opt.max_evals) {
            std::iota(idx.begin(), idx.end(), 0);
            std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
            const int lo = idx[0], hi = idx[n], nh = idx[n - 1];
            double spread = fv[hi] - fv[lo], size = 0;
            for (int i = 0; i <= n; ++i) size = std::max(size, (pts[i] - pts[lo]).cwiseAbs().maxCoeff());
            if (spread <= opt.f_tol * (1.0 + std::abs(fv[lo])) && size <= opt.x_tol) break;
            if (size <= opt.x_tol * 1e-3) break;
            Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
            for (int i = 0; i <= n; ++i)
                if (i != hi) c += pts[i];
            c /= double(n);
            Eigen::VectorXd xr = c + (c - pts[hi]);
            double fr = eval(xr);
            if (fr < fv[lo]) {
                Eigen::VectorXd xe = c + 2.0 * (c - pts[hi]);
                double fe = eval(xe);
                if (fe < fr) {
                    pts[hi] = xe;
                    fv[hi] = fe;
                } else {
                    pts[hi] = xr;
                    fv[hi] = fr;
                }
                continue;
            }
            if (fr < fv[nh]) {
                pts[hi] = xr;
                fv[hi] = fr;
                continue;
            }
            const bool outside = fr < fv[hi];
            Eigen::VectorXd xc = outside ? Eigen::VectorXd(c + 0.5 * (xr - c)) : Eigen::VectorXd(c + 0.5 * (pts[hi] - c));
            double fc = eval(xc);
            if (fc < (outside ? fr : fv[hi])) {
                pts[hi] = xc;
                fv[hi] = fc;
                continue;
            }
            for (int i = 0; i <= n; ++i) {
                if (i == lo) continue;
                pts[i] = pts[lo] + 0.5 * (pts[i] - pts[lo]);
                fv[i] = eval(pts[i]);
            }
        }
        int ib = static_cast<int>(std::min_element(fv.begin(), fv.end()) - fv.begin());
        if (fv[ib] < fbest) {
            fbest = fv[ib];
            best = pts[ib];
        }
    }
    return {best, fbest, evals};
}

}  // namespace catcomp
