#include <gtest/gtest.h>

#include <boost/numeric/odeint.hpp>
#include <cmath>

#include "aniso_stokes/hypotheses.hpp"
#include "aniso_stokes/transport.hpp"

using namespace aniso_stokes;

namespace {

ScalarField positive_bump(const GridSpec& g) {
    return ScalarField::sample(g, [](double x, double y, double) { return 1.0 + 0.5 * std::cos(x) * std::sin(y); });
}

SolverParams transport_only(double eps, double eta) {
    SolverParams p;
    p.eps = eps;
    p.eta = eta;
    return p;
}

/// Largest admissible step, slightly reduced.
double safe_dt(const VectorField& v, const SolverParams& p) { return 0.999 * cfl_dt(v, p); }

}  // namespace

TEST(Cfl, FollowsTheSummedAxisSpeed) {
    const auto g = GridSpec::cube(2, 64);
    VectorField v(g);
    v[0] = ScalarField(g, 0.6);
    v[1] = ScalarField::sample(g, [](double, double y, double) { return 0.4 * std::sin(y); });
    SolverParams p;
    p.cfl = 0.5;
    p.dt_max = 1.0;
    // 0.5 * (2 pi / 64) / (0.6 + 0.4)
    EXPECT_NEAR(cfl_dt(v, p), 0.04908738521234052, 1e-15);
    p.dt_max = 0.01;
    EXPECT_DOUBLE_EQ(cfl_dt(v, p), 0.01);
    EXPECT_DOUBLE_EQ(cfl_dt(VectorField(g), p), 0.01);
}

TEST(Continuity, RejectsNegativeDensityAndOversizedSteps) {
    const auto g = GridSpec::cube(2, 16);
    VectorField v(g);
    v[0] = ScalarField(g, 1.0);
    SolverParams p;
    EXPECT_THROW(continuity_step(ScalarField(g, -1e-3), v, 1e-4, p), NegativeInput);
    EXPECT_THROW(continuity_step(ScalarField(g, 1.0), v, 2.0 * cfl_dt(v, p), p), CflViolation);
}

TEST(Continuity, RestWithoutDiffusionOrDragIsBitwiseIdentity) {
    const auto g = GridSpec::cube(3, 8);
    const auto rho = positive_bump(g);
    const auto res = continuity_step(rho, VectorField(g), 1e-3, transport_only(0.0, 0.0));
    EXPECT_EQ(res.rho.raw(), rho.raw());
    EXPECT_EQ(res.increment.drag2g + res.increment.drag3 + res.increment.grad_gamma_half, 0.0);
}

TEST(Continuity, DiffusionDampsTheFirstModeByTheDifferenceSymbol) {
    const auto g = GridSpec::cube(1, 64);
    const auto rho = ScalarField::sample(g, [](double x, double, double) { return 1.0 + 0.1 * std::cos(x); });
    const auto out = continuity_step(rho, VectorField(g), 0.01, transport_only(0.5, 0.0)).rho;
    // 1 / (1 + eps dt (2 - 2 cos h) / h^2) at n = 64, eps = 0.5, dt = 0.01
    const double factor = 0.9950288504525544;
    const auto expected = ScalarField::sample(g, [&](double x, double, double) { return 1.0 + 0.1 * factor * std::cos(x); });
    EXPECT_LT((out - expected).max_abs(), 1e-14);
}

TEST(Continuity, DragMatchesAnAccurateOdeIntegration) {
    const double gamma = 2.0, eta = 0.1, dt = 1e-3, t_end = 0.1, r0 = 1.0;
    // reference: dr/dt = -eta (r^{2 gamma} + r^3)
    double ref = r0;
    boost::numeric::odeint::integrate_adaptive(
        boost::numeric::odeint::make_controlled<boost::numeric::odeint::runge_kutta_dopri5<double>>(1e-12, 1e-12),
        [&](double r, double& drdt, double) { drdt = -eta * (std::pow(r, 2.0 * gamma) + r * r * r); }, ref, 0.0, t_end,
        1e-4);

    const auto g = GridSpec::cube(1, 8);
    ScalarField rho(g, r0);
    double removed = 0.0;
    SolverParams p = transport_only(0.0, eta);
    p.gamma = gamma;
    const int steps = static_cast<int>(std::lround(t_end / dt));
    for (int n = 0; n < steps; ++n) {
        const auto res = continuity_step(rho, VectorField(g), dt, p);
        removed += res.increment.drag2g + res.increment.drag3;
        rho = res.rho;
    }
    for (std::size_t c = 0; c < g.size(); ++c) EXPECT_NEAR(rho[c], ref, 1e-4);
    EXPECT_NEAR(removed, (r0 - rho[0]) * g.volume(), 1e-12);
}

TEST(Continuity, DragSolveIsTheImplicitEulerRoot) {
    for (double s : {0.0, 1e-9, 0.3, 1.0, 7.5}) {
        const double r = drag_solve(s, 0.02, 0.7, 1.6);
        EXPECT_GE(r, 0.0);
        EXPECT_LE(r, s);
        EXPECT_NEAR(r + 0.02 * 0.7 * (std::pow(r, 3.2) + r * r * r), s, 1e-14 * std::max(1.0, s));
    }
}

TEST(Pressure, PowerOfDensity) {
    const auto g = GridSpec::cube(2, 8);
    EXPECT_LT((pressure_field(ScalarField(g, 2.0), 1.4) - ScalarField(g, 2.6390158215457884)).max_abs(), 1e-15);
    EXPECT_EQ(pressure_field(ScalarField(g, 0.0), 2.0).max_abs(), 0.0);
    EXPECT_THROW(pressure_field(ScalarField(g, -0.1), 2.0), NegativeInput);
}

TEST(ContinuityProperties, MassBalancePositivityAndMaximumPrinciple) {
    const auto g = GridSpec::cube(2, 32);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto v = random_smooth_field(g, seed);
        const auto rho0 = ScalarField::sample(g, [&](double x, double y, double) {
            return std::max(0.0, std::sin(x + 0.3 * double(seed)) * std::cos(y));
        });
        for (const double eta : {0.0, 0.5}) {
            const auto p = transport_only(0.05, eta);
            const double dt = safe_dt(v, p);
            auto ledger = MassLedger::start(rho0);
            const double m0 = ledger.mass_now;
            auto rho = rho0;
            for (int n = 0; n < 20; ++n) {
                const double bound = rho.max() * (1.0 + 1.1 * dt * face_divergence(v).max_abs());
                const auto res = continuity_step(rho, v, dt, p);
                EXPECT_GE(res.rho.min(), 0.0);
                if (eta == 0.0) EXPECT_LE(res.rho.max(), bound * (1.0 + 1e-12));
                ledger.add(res.increment, res.rho);
                rho = res.rho;
            }
            EXPECT_NEAR(ledger.balance(), m0, 1e-12 * m0);
        }
    }
}

TEST(ContinuityProperties, L2GrowthIsControlledByTheDivergence) {
    const auto g = GridSpec::cube(2, 32);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto v = random_smooth_field(g, seed + 10);
        const auto rho0 = positive_bump(g);
        const auto p = transport_only(0.0, 0.0);
        const double dt = safe_dt(v, p);
        const double div_max = face_divergence(v).max_abs();
        auto rho = rho0;
        const int steps = 30;
        for (int n = 0; n < steps; ++n) rho = continuity_step(rho, v, dt, p).rho;
        EXPECT_LE(rho.l2_norm(), rho0.l2_norm() * std::exp(0.5 * steps * dt * div_max) * (1.0 + 1e-12));
    }
}

TEST(ContinuityProperties, SecondOrderReconstructionConservesMass) {
    const auto g = GridSpec::cube(2, 32);
    const auto v = random_smooth_field(g, 4);
    auto p = transport_only(0.01, 0.0);
    p.order = 2;
    const double dt = safe_dt(v, p);
    auto rho = positive_bump(g);
    const double m0 = rho.integral();
    for (int n = 0; n < 20; ++n) rho = continuity_step(rho, v, dt, p).rho;
    EXPECT_GT(rho.min(), 0.0);
    EXPECT_NEAR(rho.integral(), m0, 1e-12 * m0);
}

TEST(ContinuityProperties, DissipationIncrementIsNonnegative) {
    const auto g = GridSpec::cube(2, 16);
    const auto res = continuity_step(positive_bump(g), VectorField(g), 1e-3, transport_only(0.1, 0.0));
    EXPECT_GT(res.increment.grad_gamma_half, 0.0);
    EXPECT_EQ(gamma_half_dissipation_rate(ScalarField(g, 3.0), 0.1, 2.0), 0.0);
}
