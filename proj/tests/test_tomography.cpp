#include <gtest/gtest.h>

#include <random>

#include "catcomp/dynamics.hpp"
#include "catcomp/tomography.hpp"

using namespace catcomp;

namespace {

const double kKappa = 1.0 / 260e-6;

GridAxes standard_axes() { return GridAxes::square(-7, 7, 201); }

std::vector<double> real_cut(const CharGrid& g) {
    Vector c = g.re_cut();
    std::vector<double> out(c.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) out[i] = c(i).real();
    return out;
}

double fock_parity(const DensityMatrix& rho) {
    double p = 0;
    for (Eigen::Index n = 0; n < rho.matrix.rows(); ++n) p += (n % 2 ? -1.0 : 1.0) * rho.matrix(n, n).real();
    return p;
}

}  // namespace

TEST(CharFunction, VacuumIsGaussian) {
    SpaceSpec s(30);
    GridAxes ax = GridAxes::square(-4, 4, 41);
    CharGrid g = char_function(make_vacuum(s), ax);
    EXPECT_LE((g.values - vacuum_char(ax).values).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(CharFunction, CoherentMatchesClosedForm) {
    SpaceSpec s(60);
    const cplx a(1.3, -0.6);
    GridAxes ax = GridAxes::square(-5, 5, 51);
    CharGrid g = char_function(make_coherent(a, s), ax);
    double worst = 0;
    for (std::size_t i = 0; i < ax.im_axis.size(); ++i)
        for (std::size_t j = 0; j < ax.re_axis.size(); ++j) {
            cplx nu(ax.re_axis[j], ax.im_axis[i]);
            cplx ref = std::exp(-0.5 * std::norm(nu) + nu * std::conj(a) - std::conj(nu) * a);
            worst = std::max(worst, std::abs(g.values(i, j) - ref));
        }
    EXPECT_LE(worst, 1e-8);
}

TEST(CharFunction, HermitianSymmetryAndNormalisation) {
    SpaceSpec s(60);
    CharGrid g = char_function(make_squeezed_cat(cplx(1.8, 0.3), 0.4, 0.2, -1, s), GridAxes::square(-6, 6, 61));
    EXPECT_LE(g.hermitian_defect(), 1e-8);
    EXPECT_NEAR(std::abs(g.at_origin() - 1.0), 0.0, 1e-6);
    take_warnings();
}

TEST(CharFunction, DisplacementElementsMatchMatrixExponential) {
    for (cplx nu : {cplx(0.3, 0.1), cplx(-1.7, 2.2), cplx(2.5, -1.0)}) {
        Matrix ref = ops::displacement(nu, 120).topLeftCorner(40, 40);
        EXPECT_LE((displacement_elements(nu, 40) - ref).cwiseAbs().maxCoeff(), 1e-10) << nu;
    }
}

TEST(CharFunction, DisplacementElementsStayBoundedFarOut) {
    Matrix d = displacement_elements(cplx(10.0, -4.0), 100);
    EXPECT_TRUE(d.allFinite());
    EXPECT_LE(d.cwiseAbs().maxCoeff(), 1.0 + 1e-12);
}

TEST(CharFunction, OddCatBlobsCarryTheParitySign) {
    SpaceSpec s(60);
    const double a = 1.8;
    PureState cat = make_cat(a, -1, s);
    std::vector<double> ax = linspace(-7, 7, 701);
    CharGrid g = char_function(cat, {ax, {0.0}});
    std::vector<double> cut = real_cut(g);
    // closed-form real cut; the central lobe tail pulls the extremum slightly past 2a
    const double n2 = 1.0 / (2.0 * (1.0 - std::exp(-2 * a * a)));
    auto exact = [&](double x) {
        return n2 * (2 * std::exp(-0.5 * x * x) - std::exp(-0.5 * (x - 2 * a) * (x - 2 * a)) -
                     std::exp(-0.5 * (x + 2 * a) * (x + 2 * a)));
    };
    for (double c : {2 * a, -2 * a}) {
        double xmin = c;
        for (double x = c - 0.3; x <= c + 0.3; x += 1e-5)
            if (exact(x) < exact(xmin)) xmin = x;
        BlobFit b = blob_amplitude(ax, cut, c, 0.8);
        EXPECT_EQ(b.method, "fit");
        EXPECT_NEAR(b.center, xmin, 0.02);
        EXPECT_LT(b.signed_amplitude, 0.0);
        EXPECT_NEAR(b.amplitude, std::abs(char_value(cat, b.center).real()), 1e-3);
        EXPECT_NEAR(b.amplitude, 0.5, 1e-2);
    }
}

TEST(BlobAmplitude, VacuumHasNoBlob) {
    std::vector<double> ax = linspace(-7, 7, 701);
    BlobFit b = blob_amplitude(ax, real_cut(vacuum_char({ax, {0.0}})), 3.6, 0.8);
    EXPECT_LE(b.amplitude, 1e-4);
    EXPECT_EQ(b.method, "no_blob");
    EXPECT_THROW(blob_amplitude(ax, real_cut(vacuum_char({ax, {0.0}})), 30.0, 0.5), std::invalid_argument);
}

TEST(BlobAmplitude, LossTrajectoryFollowsFilteredGaussianPeak) {
    // a Gaussian blob of width w at c, filtered, peaks at c sqrt(eta) / (eta + (1 - eta) w^2).
    // The coherence S|a><-a|S^dag carries a single Gaussian blob, so the formula is exact for it.
    SpaceSpec s(80);
    std::vector<double> ax = linspace(-8, 0, 801);
    for (double r : {0.0, squeeze_r_from_db(-6.7)}) {
        Matrix sq = ops::squeeze(r, 0.0, 80);
        Vector plus = sq * make_coherent(1.8, s).amplitudes;
        Vector minus = sq * make_coherent(-1.8, s).amplitudes;
        DensityMatrix coh{plus * minus.adjoint(), s, Factor::cavity};
        CharGrid g0 = char_function(coh, {ax, {0.0}});
        BlobFit b0 = blob_amplitude(ax, real_cut(g0), -3.6 * std::exp(-r), 1.5, +1);
        EXPECT_EQ(b0.method, "fit");
        for (double t : {50e-6, 150e-6}) {
            const double eta = std::exp(-kKappa * t);
            DensityMatrix rt = amplitude_damping_fock(coh, kKappa, t);
            const double guess = b0.center * std::sqrt(eta) / (eta + (1 - eta) * b0.sigma * b0.sigma);
            BlobFit bt = blob_amplitude(ax, real_cut(char_function(rt, {ax, {0.0}})), guess, 1.5, +1);
            EXPECT_NEAR(bt.center, guess, 2e-3) << r << " " << t;
            if (r > 0) {
                EXPECT_LT(bt.center, b0.center);
            } else {
                EXPECT_GT(bt.center, b0.center);
            }
        }
    }
    take_warnings();
}

TEST(Wigner, VacuumMatchesFockOracle) {
    SpaceSpec s(20);
    DensityMatrix vac = to_density(make_vacuum(s));
    WignerGrid w = wigner_from_char(vacuum_char(standard_axes()), 4);
    EXPECT_NEAR(w.at_origin(), wigner_fock(vac, 0.0), 1e-3);
    EXPECT_NEAR(w.at_origin(), 2.0 / PI, 1e-3);
    for (std::size_t k = 0; k < w.re_axis.size(); k += 37)
        for (std::size_t l = 0; l < w.im_axis.size(); l += 41)
            EXPECT_NEAR(w.values(l, k), wigner_fock(vac, cplx(w.re_axis[k], w.im_axis[l])), 1e-3);
    EXPECT_NEAR(w.integral(), 1.0, 0.02);
    EXPECT_LE(w.imag_residue, 1e-8);
}

TEST(Wigner, OddCatIsNegativeAtOrigin) {
    SpaceSpec s(60);
    WignerGrid w = wigner_from_char(char_function(make_cat(1.8, -1, s), standard_axes()), 4);
    EXPECT_LT(w.at_origin(), -0.6);
    EXPECT_NEAR(w.at_origin(), wigner_fock(to_density(make_cat(1.8, -1, s)), 0.0), 1e-2);
}

TEST(Wigner, RoundTripRecoversCharFunction) {
    SpaceSpec s(60);
    CharGrid g = char_function(make_squeezed_cat(1.8, 0.5, 0.0, -1, s), standard_axes());
    CharGrid back = char_from_wigner(wigner_from_char(g, 4));
    EXPECT_LE((back.values - g.values).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Wigner, CoarseGridIsRejected) {
    SpaceSpec s(60);
    CharGrid g = char_function(make_cat(1.8, -1, s), GridAxes::square(-7, 7, 29));
    EXPECT_THROW(wigner_from_char(g, 4), std::invalid_argument);
    EXPECT_THROW(wigner_from_char(g, 0), std::invalid_argument);
}

TEST(Parity, FromCharGrid) {
    SpaceSpec s(60);
    EXPECT_NEAR(parity_from_char(vacuum_char(standard_axes())), 1.0, 1e-3);
    EXPECT_NEAR(parity_from_char(char_function(make_cat(1.8, -1, s), standard_axes())), -1.0, 2e-3);
    DensityMatrix decayed = amplitude_damping_fock(to_density(make_cat(1.8, -1, s)), kKappa, 20e-6);
    EXPECT_NEAR(parity_from_char(char_function(decayed, standard_axes())), fock_parity(decayed), 5e-3);
}

TEST(Parity, TruncatedGridIsAnError) {
    SpaceSpec s(60);
    EXPECT_THROW(parity_from_char(char_function(make_cat(1.8, -1, s), GridAxes::square(-4, 4, 81))),
                 std::invalid_argument);
    take_warnings();
}

TEST(Parity, FromWignerOrigin) {
    SpaceSpec s(60);
    EXPECT_NEAR(parity_from_wigner(wigner_from_char(vacuum_char(standard_axes()), 4)), 1.0, 1e-12);
    EXPECT_NEAR(parity_from_wigner(wigner_from_char(char_function(make_cat(1.8, 1, s), standard_axes()), 4)), 1.0, 1e-2);
}

TEST(Parity, ThreeMethodsAgreeAlongDecay) {
    SpaceSpec s(60);
    DensityMatrix rho = to_density(make_cat(1.8, -1, s));
    for (double t : {0.0, 20e-6, 60e-6, 120e-6}) {
        DensityMatrix rt = amplitude_damping_fock(rho, kKappa, t);
        CharGrid g = char_function(rt, standard_axes());
        const double pc = parity_from_char(g), pw = parity_from_wigner(wigner_from_char(g, 4)), pf = fock_parity(rt);
        EXPECT_NEAR(pc, pf, 1e-2) << t;
        EXPECT_NEAR(pw, pf, 1e-2) << t;
        EXPECT_NEAR(pc, pw, 1e-2) << t;
    }
}

TEST(Overlap, IntegratedFidelity) {
    SpaceSpec s(60);
    PureState cat = make_cat(1.8, -1, s);
    CharGrid gc = char_function(cat, standard_axes());
    EXPECT_NEAR(overlap_fidelity_char(gc, gc).fidelity, 1.0, 1e-3);
    CharGrid gv = vacuum_char(standard_axes());
    EXPECT_NEAR(overlap_fidelity_char(gv, char_function(make_coherent(2.0, s), standard_axes())).fidelity,
                std::exp(-4.0), 2e-3);
    DensityMatrix decayed = amplitude_damping_fock(to_density(cat), kKappa, 20e-6);
    OverlapResult o = overlap_fidelity_char(gc, char_function(decayed, standard_axes()));
    EXPECT_NEAR(o.fidelity, state_fidelity(cat, decayed), 5e-3);
    EXPECT_LE(o.imag_residue, 1e-3);
    EXPECT_THROW(overlap_fidelity_char(gc, vacuum_char(GridAxes::square(-6, 6, 201))), std::invalid_argument);
}

TEST(SubPlanck, VacuumGivesSingleLobe) {
    CharGrid g = vacuum_char(GridAxes::re_cut(-12, 12, 1201));
    Marginal m = subplanck_marginal(g);
    EXPECT_EQ(m.contrast, 0.0);
    EXPECT_NEAR(m.sigma, m.vacuum_sigma, 1e-6);
    EXPECT_NEAR(m.vacuum_sigma, 0.5, 1e-3);
}

TEST(SubPlanck, CatShowsFringesFinerThanVacuum) {
    SpaceSpec s(60);
    const double a = 1.8;
    Marginal m = subplanck_marginal(char_function(make_cat(a, -1, s), GridAxes::re_cut(-12, 12, 1201)));
    EXPECT_GT(m.contrast, 0.9);
    // odd cat momentum marginal: e^{-2p^2} (1 - cos 4ap) / (sqrt(pi/2) (1 - e^{-2a^2}))
    const double norm = std::sqrt(PI / 2) * (1 - std::exp(-2 * a * a));
    double worst = 0;
    for (std::size_t i = 0; i < m.p_axis.size(); ++i) {
        const double p = m.p_axis[i];
        worst = std::max(worst, std::abs(m.values[i] - std::exp(-2 * p * p) * (1 - std::cos(4 * a * p)) / norm));
    }
    EXPECT_LE(worst, 1e-6);
    // first maximum solves tan(2ap) = a/p
    double lo = 0.05, hi = PI / (4 * a);
    for (int it = 0; it < 100; ++it) {
        double mid = 0.5 * (lo + hi);
        (std::tan(2 * a * mid) < a / mid ? lo : hi) = mid;
    }
    int i0 = axis_index_of(m.p_axis, 0.0, 1e-9);
    std::size_t peak = i0 + 1;
    while (peak + 1 < m.values.size() && !(m.values[peak] > m.values[peak - 1] && m.values[peak] >= m.values[peak + 1]))
        ++peak;
    EXPECT_NEAR(m.p_axis[peak], lo, m.p_axis[1] - m.p_axis[0]);
    EXPECT_LT(m.p_axis[peak], m.vacuum_sigma);
}

TEST(Reconstruction, VacuumSamples) {
    Reconstruction r = reconstruct_density(vacuum_char(GridAxes::square(-4, 4, 21)), 10);
    Eigen::SelfAdjointEigenSolver<Matrix> es(r.rho.matrix);
    EXPECT_GE(es.eigenvalues().maxCoeff(), 0.999);
    EXPECT_GE(std::abs(r.rho.matrix(0, 0)), 0.999);
}

TEST(Reconstruction, NoiselessOddCat) {
    SpaceSpec s(20);
    PureState cat = make_cat(1.8, -1, s);
    Reconstruction r = reconstruct_density(char_function(cat, GridAxes::square(-5, 5, 25)), 20);
    EXPECT_GE(state_fidelity(cat, r.rho), 0.99);
    take_warnings();
}

TEST(Reconstruction, NoisySamplesStayPhysical) {
    SpaceSpec s(20);
    PureState cat = make_cat(1.8, -1, s);
    CharGrid clean = char_function(cat, GridAxes::square(-5, 5, 25));
    std::mt19937_64 rng(99);
    std::normal_distribution<double> g(0.0, 0.01);
    double worst_f = 1, worst_eig = 1;
    for (int draw = 0; draw < 10; ++draw) {
        CharGrid noisy = clean;
        for (Eigen::Index k = 0; k < noisy.values.size(); ++k) noisy.values(k) += cplx(g(rng), g(rng));
        Reconstruction r = reconstruct_density(noisy, 20, 2000, 1e-10);
        worst_f = std::min(worst_f, state_fidelity(cat, r.rho));
        worst_eig = std::min(worst_eig, check_density(r.rho).min_eigenvalue);
    }
    EXPECT_GE(worst_f, 0.97);
    EXPECT_GE(worst_eig, -1e-8);
    take_warnings();
}

TEST(Reconstruction, TooFewSamplesThrows) {
    EXPECT_THROW(reconstruct_density(vacuum_char(GridAxes::square(-3, 3, 5)), 20), std::invalid_argument);
}
