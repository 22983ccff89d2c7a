#include <gtest/gtest.h>

#include <cmath>

#include "aniso_stokes/diagnostics.hpp"
#include "aniso_stokes/hypotheses.hpp"
#include "aniso_stokes/stokes.hpp"

using namespace aniso_stokes;

namespace {

ViscosityTensor modulated_isotropic(const GridSpec& g) {
    return ViscosityTensor::varying_from(g, [](double x, double, double) {
        // tau = 2 nu(x) D(u), nu = 1 + 0.1 sin x1
        return ViscosityTensor::isotropic(3, 1.0 + 0.1 * std::sin(x)).constant_tensor();
    });
}

VectorField shear(const GridSpec& g) {
    VectorField u(g);
    u[0] = ScalarField::sample(g, [](double, double y, double) { return std::sin(y); });
    return u;
}

}  // namespace

TEST(StokesBuild, DiagonalSymbolOnFirstAxis) {
    const auto g = GridSpec::cube(3, 8);
    const auto op = StokesOperator::build(ViscosityTensor::diag({2.0, 1.0, 1.0}), g, 0.0);
    EXPECT_EQ(op.mode(), StokesOperator::Mode::Symbol);
    const double k[3] = {1.0, 0.0, 0.0};
    const auto m = ViscosityTensor::diag({2.0, 1.0, 1.0}).constant_tensor().symbol(k);
    // A e1 at k = e1 is nu_x e1
    EXPECT_NEAR(m(0, 0), 2.0, 1e-14);
    EXPECT_NEAR(m(1, 0), 0.0, 1e-14);
    EXPECT_NEAR(m(2, 0), 0.0, 1e-14);
}

TEST(StokesBuild, DiagonalSymbolIsTheAnisotropicLaplacianForEqualViscosities) {
    const auto t = ViscosityTensor::diag({1.5, 1.5, 1.5}).constant_tensor();
    const double k[3] = {0.3, -1.2, 2.0};
    const auto m = t.symbol(k);
    const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(m(i, j), i == j ? 1.5 * k2 : 0.0, 1e-13);
}

TEST(StokesBuild, IsotropicSymbolMatchesDirectApplicationOnPlaneWaves) {
    const auto g = GridSpec::cube(3, 8);
    const double nu = 0.8;
    const auto a = ViscosityTensor::isotropic(3, nu);
    const auto op = StokesOperator::build(a, g, 0.0);
    const int modes[3][3] = {{1, 0, 0}, {1, 2, 0}, {-1, 1, 3}};
    const double dir[3] = {0.3, -0.5, 0.9};
    for (const auto& m : modes) {
        VectorField u(g);
        for (int c = 0; c < 3; ++c)
            u[c] = ScalarField::sample(g, [&](double x, double y, double z) { return dir[c] * std::cos(m[0] * x + m[1] * y + m[2] * z); });
        const auto au = op.apply(u);
        const double k2 = m[0] * m[0] + m[1] * m[1] + m[2] * m[2];
        const double kdot = m[0] * dir[0] + m[1] * dir[1] + m[2] * dir[2];
        for (int c = 0; c < 3; ++c) {
            // nu (|k|^2 I + k k^T) applied to the amplitude
            const double amp = nu * (k2 * dir[c] + m[c] * kdot);
            const auto expected = ScalarField::sample(g, [&](double x, double y, double z) { return amp * std::cos(m[0] * x + m[1] * y + m[2] * z); });
            EXPECT_LT((au[c] - expected).max_abs(), 1e-12);
        }
        const double kv[3] = {double(m[0]), double(m[1]), double(m[2])};
        const auto sym = a.constant_tensor().symbol(kv);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) EXPECT_NEAR(sym(i, j), nu * ((i == j) * k2 + kv[i] * kv[j]), 1e-13);
    }
}

TEST(StokesBuild, DegenerateTensorIsSingular) {
    // no coefficient couples to the third axis, so the symbol vanishes at k = (0,0,1)
    Rank4 a = ViscosityTensor::isotropic(3, 1.0).constant_tensor();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l)
                    if (i == 2 || j == 2 || k == 2 || l == 2) a(i, j, k, l) = 0.0;
    EXPECT_THROW(StokesOperator::build(ViscosityTensor::constant(a), GridSpec::cube(3, 8), 0.0), SingularSymbol);
}

TEST(StokesBuild, IndefiniteTensorIsNotCoercive) {
    // a negative definite symbol is invertible but has the wrong sign
    const auto a = ViscosityTensor::isotropic(2, 1.0).scaled(-1.0);
    EXPECT_THROW(StokesOperator::build(a, GridSpec::cube(2, 8), 0.0), NotCoercive);
}

TEST(StokesSolve, ConstantPotentialGivesZeroVelocity) {
    const auto g = GridSpec::cube(3, 8);
    const auto op = StokesOperator::build(ViscosityTensor::diag({1.0, 2.0, 3.0}), g, 0.0);
    const auto u = op.solve(ScalarField(g, 4.0));
    for (const auto& c : u) EXPECT_LT(c.max_abs(), 1e-14);
}

TEST(StokesSolve, SingleModeClosedForm) {
    const auto g = GridSpec::cube(3, 16);
    const auto op = StokesOperator::build(ViscosityTensor::diag({2.0, 1.0, 1.0}), g, 0.0);
    const auto q = ScalarField::sample(g, [](double x, double, double) { return -std::cos(x); });
    const auto u = op.solve(q);
    const auto expected = ScalarField::sample(g, [](double x, double, double) { return 0.5 * std::sin(x); });
    EXPECT_LT((u[0] - expected).max_abs(), 1e-10);
    EXPECT_LT(u[1].max_abs() + u[2].max_abs(), 1e-10);
}

TEST(StokesSolve, ManufacturedVaryingCoefficientRoundTrip) {
    const auto g = GridSpec::cube(3, 16);
    const auto op = StokesOperator::build(modulated_isotropic(g), g, 0.0);
    EXPECT_EQ(op.mode(), StokesOperator::Mode::Krylov);
    EXPECT_EQ(op.krylov_method(), StokesOperator::KrylovMethod::ConjugateGradient);
    const auto target = shear(g);
    const auto b = op.apply(target);
    int its = 0;
    const auto u = op.solve_rhs(b, &its);
    EXPECT_GT(its, 0);
    auto r = op.apply(u);
    r -= b;
    EXPECT_LE(r.l2_norm(), 1e-8 * b.l2_norm());
    EXPECT_LE((u - target).l2_norm(), 1e-7 * target.l2_norm());
}

TEST(StokesSolve, NonMajorSymmetricTensorUsesGmres) {
    const auto g = GridSpec::cube(2, 16);
    const auto t = ViscosityTensor::varying_from(g, [](double x, double, double) {
        Rank4 a = ViscosityTensor::isotropic(2, 1.0 + 0.2 * std::cos(x)).constant_tensor();
        // E11 (x) E22 - E22 (x) E11 adds nothing to the quadratic form but breaks major symmetry
        a(0, 0, 1, 1) += 0.3;
        a(1, 1, 0, 0) -= 0.3;
        return a;
    });
    EXPECT_GT(t.major_asymmetry(), 0.1);
    const auto op = StokesOperator::build(t, g, 0.0);
    EXPECT_EQ(op.krylov_method(), StokesOperator::KrylovMethod::Gmres);
    const auto q = ScalarField::sample(g, [](double x, double y, double) { return std::cos(x) * std::sin(2.0 * y); });
    const auto u = op.solve(q);
    EXPECT_LE(op.residual(u, q), 1e-6 * spectral::grad(q).l2_norm());
}

TEST(StokesSolve, KrylovReportsNonConvergence) {
    const auto g = GridSpec::cube(3, 8);
    StokesSettings s;
    s.max_iter = 1;
    s.rtol = 1e-14;
    const auto op = StokesOperator::build(modulated_isotropic(g), g, 0.0, s);
    const auto q = ScalarField::sample(g, [](double x, double y, double z) { return std::sin(x + 2.0 * y) * std::cos(z); });
    try {
        (void)op.solve(q);
        FAIL() << "expected non-convergence";
    } catch (const KrylovNoConvergence& e) {
        EXPECT_GE(e.iterations(), 1);
        EXPECT_GT(e.residual(), 0.0);
    }
}

TEST(StokesSolve, OutputHasZeroMeanAndIsLinear) {
    const auto g = GridSpec::cube(2, 16);
    const auto op = StokesOperator::build(ViscosityTensor::diag({1.0, 4.0}), g, 0.0);
    const auto q = random_smooth_field(g, 3)[0];
    const auto u = op.solve(q);
    for (const auto& c : u) EXPECT_LT(std::abs(c.mean()), 1e-15);
    const auto u3 = op.solve(-2.5 * q);
    EXPECT_LT((u3 - (-2.5) * u).l2_norm(), 1e-13 * u.l2_norm());
}

TEST(StokesSolve, EnergyIdentityAndCoercivity) {
    const auto g = GridSpec::cube(3, 16);
    for (const auto& a : {ViscosityTensor::diag({1.0, 1.0, 4.0}), modulated_isotropic(g)}) {
        const auto op = StokesOperator::build(a, g, 0.0);
        const auto q = random_smooth_field(g, 5)[1];
        const auto u = op.solve(q);
        const double work = viscous_work(a, 0.0, u).total;
        // A u = grad q, so <tau, grad u> = <grad q, u> = -<q, div u>
        EXPECT_NEAR(work, -inner(q, spectral::div(u)), 1e-7 * std::abs(work));
        const auto d = spectral::sym_grad(u);
        EXPECT_GE(work, op.coercivity().c_est * contract(d, d).integral() * (1.0 - 1e-6));
    }
}

TEST(StokesSolve, DiagonalFastPathMatchesFullTensor) {
    const auto g = GridSpec::cube(3, 16);
    const auto q = random_smooth_field(g, 8)[2];
    for (const auto& nu : {std::vector<double>{1.3, 1.3, 1.3}, std::vector<double>{1.0, 2.0, 9.0}}) {
        const auto diag = ViscosityTensor::diag(nu);
        const auto full = ViscosityTensor::constant(diag.constant_tensor());
        const auto u1 = StokesOperator::build(diag, g, 0.0).solve(q);
        const auto u2 = StokesOperator::build(full, g, 0.0).solve(q);
        EXPECT_LT((u1 - u2).l2_norm(), 1e-10);
    }
}

TEST(StokesResidual, ClosedForms) {
    const auto g = GridSpec::cube(3, 8);
    const auto op = StokesOperator::build(ViscosityTensor::diag({1.0, 1.0, 1.0}), g, 0.0);
    const VectorField zero(g);
    EXPECT_LT(op.residual(zero, ScalarField(g, 2.0)), 1e-14);
    const auto q = ScalarField::sample(g, [](double x, double, double) { return std::cos(x); });
    EXPECT_NEAR(op.residual(zero, q), std::sqrt(g.volume() / 2.0), 1e-12);
    const auto u = op.solve(q);
    EXPECT_LE(op.residual(u, q), 1e-12 * std::sqrt(g.volume() / 2.0));
}
