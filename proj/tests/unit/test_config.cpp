#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "aniso_stokes/config.hpp"
#include "aniso_stokes/snapshot.hpp"

using namespace aniso_stokes;

TEST(Config, EmptyTextGivesDocumentedDefaults) {
    const auto cfg = parse_config_text("");
    EXPECT_EQ(cfg.grid.dim, 2);
    EXPECT_EQ(cfg.grid.n[0], 64);
    EXPECT_EQ(cfg.params.gamma, 2.0);
    EXPECT_EQ(cfg.params.cfl, 0.45);
    EXPECT_EQ(cfg.params.fp_tol, 1e-7);
    EXPECT_EQ(cfg.t_end, 0.1);
    EXPECT_EQ(cfg.seed, 20240613u);
    EXPECT_EQ(cfg.viscosity.kind, "diag");
    EXPECT_NO_THROW(cfg.params.validate());
    EXPECT_NO_THROW(make_problem(cfg));
    // every documented key appears in the help text with its default
    const auto help = config_help();
    for (const auto& k : detail::config_keys()) EXPECT_NE(help.find(k.key), std::string::npos) << k.key;
}

TEST(Config, CommentsAndWhitespaceAreIgnored) {
    const auto cfg = parse_config_text("# header\n\n  grid.dim = 3   # inline\ngrid.n=16\nviscosity.nu = 1, 1, 4\n");
    EXPECT_EQ(cfg.grid.dim, 3);
    EXPECT_EQ(cfg.grid.n[2], 16);
    EXPECT_EQ(cfg.viscosity.nu, (std::vector<double>{1.0, 1.0, 4.0}));
}

TEST(Config, GammaMustExceedOne) {
    try {
        (void)parse_config_text("grid.dim = 2\nparams.gamma = 0.9\n");
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2);
    }
}

TEST(Config, UnknownDuplicateAndMalformedLinesAreErrors) {
    try {
        (void)parse_config_text("params.gama = 2\n");
        FAIL() << "expected an unknown key";
    } catch (const UnknownKey& e) {
        EXPECT_EQ(e.key(), "params.gama");
        EXPECT_EQ(e.line(), 1);
    }
    EXPECT_THROW(parse_config_text("params.eps = 0.1\nparams.eps = 0.2\n"), ParseError);
    EXPECT_THROW(parse_config_text("params.eps 0.1\n"), ParseError);
    EXPECT_THROW(parse_config_text("params.eps = abc\n"), ParseError);
    EXPECT_THROW(parse_config_text("grid.n = 64\ndefect.windows = 3\n"), ParseError);
}

TEST(Config, OscillatoryInitialDataOnAnAlignedGrid) {
    auto cfg = parse_config_text("grid.n = 64\ninit.kind = oscillatory\ninit.osc_amplitude = 0.5\n");
    const auto rho = make_initial(cfg.init, cfg.grid);
    EXPECT_NEAR(rho.min(), 0.5, 1e-12);
    EXPECT_NEAR(rho.max(), 1.5, 1e-12);
    cfg.init.osc_amplitude = 0.0;
    EXPECT_LT((make_initial(cfg.init, cfg.grid) - ScalarField(cfg.grid, 1.0)).max_abs(), 1e-15);
}

TEST(Config, ConstantInitialDataIsUniformAndClippingKeepsPositivity) {
    InitialSpec s;
    s.kind = "constant";
    const auto g = GridSpec::cube(2, 16);
    EXPECT_EQ(make_initial(s, g).min(), 1.0);
    EXPECT_EQ(make_initial(s, g).max(), 1.0);
    s.kind = "oscillatory";
    s.wavelength = two_pi / 2.0;
    s.osc_amplitude = 3.0;
    EXPECT_GE(make_initial(s, g).min(), 0.0);
}

TEST(Config, UnresolvedWavelengthIsRejected) {
    InitialSpec s;
    s.kind = "oscillatory";
    s.wavelength = two_pi / 16.0;
    EXPECT_THROW(make_initial(s, GridSpec::cube(2, 32)), UnresolvedWavelength);
    EXPECT_NO_THROW(make_initial(s, GridSpec::cube(2, 64)));
}

TEST(Config, ParsingIsDeterministic) {
    const std::string text = "grid.dim = 3\ngrid.n = 16\nviscosity.nu = 1,1,4\ninit.kind = bump\nrun.seed = 7\n";
    const auto a = parse_config_text(text), b = parse_config_text(text);
    EXPECT_EQ(make_initial(a.init, a.grid).raw(), make_initial(b.init, b.grid).raw());
    EXPECT_EQ(a.seed, 7u);
}

TEST(Config, ViscosityRatioScalesTheLastAxis) {
    const auto cfg = parse_config_text("grid.dim = 2\nviscosity.nu = 1,2\n");
    const auto a = make_viscosity(cfg, 8.0);
    EXPECT_EQ(a.kind(), ViscosityTensor::Kind::DiagNu);
    EXPECT_DOUBLE_EQ(a.constant_tensor()(1, 1, 1, 1), 16.0);
}

TEST(Config, VaryingTensorFromCoefficientFiles) {
    const auto dir = std::filesystem::temp_directory_path() / "aniso_stokes_varying";
    std::filesystem::create_directories(dir);
    const auto g = GridSpec::cube(2, 8);
    // isotropic 2 mu D with mu = 1 + 0.2 cos x1, written as the independent entries of A
    const auto mu = ScalarField::sample(g, [](double x, double, double) { return 1.0 + 0.2 * std::cos(x); });
    for (int i = 0; i < 2; ++i)
        for (int j = i; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = k; l < 2; ++l) {
                    const double w = (i == k && j == l ? 1.0 : 0.0) + (i == l && j == k ? 1.0 : 0.0);
                    const auto name = "mu_" + std::to_string(i + 1) + std::to_string(j + 1) + std::to_string(k + 1) +
                                      std::to_string(l + 1) + ".asf";
                    write_snapshot(dir / name, w * mu, 0.0);
                }
    const auto cfg = parse_config_text("grid.dim = 2\ngrid.n = 8\nviscosity.kind = varying\nviscosity.path = mu\n", dir);
    const auto a = make_viscosity(cfg);
    EXPECT_EQ(a.kind(), ViscosityTensor::Kind::VaryingFull);
    const auto c = a.coefficients_at(0.0);
    EXPECT_NEAR(c[Rank4::index(2, 0, 1, 0, 1)], 1.2, 1e-14);
    EXPECT_NEAR(c[Rank4::index(2, 0, 0, 0, 0)], 2.0 * 1.2, 1e-14);
    std::filesystem::remove_all(dir);
}
