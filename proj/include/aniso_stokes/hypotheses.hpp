#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "aniso_stokes/diagnostics.hpp"
#include "aniso_stokes/errors.hpp"
#include "aniso_stokes/stokes.hpp"
#include "aniso_stokes/viscosity.hpp"

namespace aniso_stokes {

/// Smooth random velocity: a few low Fourier modes per component with uniform random
/// amplitudes and phases, zero mean.
inline VectorField random_smooth_field(const GridSpec& grid, std::uint64_t seed, int max_mode = 3, int terms = 6) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(-1.0, 1.0), phase(0.0, two_pi);
    std::uniform_int_distribution<int> mode(-max_mode, max_mode);
    VectorField out(grid);
    for (int c = 0; c < grid.dim; ++c) {
        for (int t = 0; t < terms; ++t) {
            int m[3] = {0, 0, 0};
            do {
                for (int a = 0; a < grid.dim; ++a) m[a] = mode(rng);
            } while (m[0] == 0 && m[1] == 0 && m[2] == 0);
            const double A = amp(rng), phi = phase(rng);
            const double w[3] = {two_pi / grid.length[0], two_pi / grid.length[1], two_pi / grid.length[2]};
            out[c] += ScalarField::sample(grid, [&](double x, double y, double z) {
                return A * std::sin(m[0] * w[0] * x + m[1] * w[1] * y + m[2] * w[2] * z + phi);
            });
        }
    }
    return out;
}

/// Discrete L^p norm of the Euclidean magnitude of a vector field.
inline double lp_norm(const VectorField& v, double p) { return v.magnitude().lp_norm(p); }

struct HypothesisReport {
    double h1_residual = 0.0;      ///< max |tau : grad u - tau : D(u)| over samples
    CoercivityReport coercivity;   ///< H3
    bool h4_checked = false;       ///< symbol invertibility is only checked for constant tensors
    bool h4_invertible = false;
    std::string h4_failure;
    double h4_sample_norm = 0.0;   ///< max ||A^{-1} grad div w||_{3/2} / ||w||_{3/2}
    static constexpr const char* h2_note =
        "H2 follows from convexity of the quadratic stress once H3 holds; not checked numerically";

    bool passed(double h1_tol = 1e-12) const {
        return h1_residual <= h1_tol && coercivity.passed && (!h4_checked || h4_invertible);
    }
};

inline HypothesisReport audit_hypotheses(const ViscosityTensor& a, const std::vector<VectorField>& samples, double t = 0.0,
                                         std::uint64_t seed = default_coercivity_seed) {
    if (samples.empty()) throw Error("hypothesis audit needs at least one sample field");
    const auto& grid = samples.front().grid();
    HypothesisReport rep;
    for (const auto& u : samples) {
        const auto w = viscous_work(a, t, u);
        // the identity is relative to the size of the stress
        const double scale = std::max(1.0, w.pointwise.max_abs());
        rep.h1_residual = std::max(rep.h1_residual, w.h1_residual / scale);
    }
    rep.coercivity = coercivity_estimate(a, t, &grid, seed);
    rep.h4_checked = a.is_constant();
    if (!rep.coercivity.passed) return rep;
    try {
        const auto op = StokesOperator::build(a, grid, t, StokesSettings{}, false);
        rep.h4_invertible = true;
        for (const auto& w : samples) {
            const double denom = lp_norm(w, 1.5);
            if (denom == 0.0) continue;
            const auto u = op.solve(spectral::div(w));
            rep.h4_sample_norm = std::max(rep.h4_sample_norm, lp_norm(u, 1.5) / denom);
        }
    } catch (const SingularSymbol& e) {
        rep.h4_invertible = false;
        rep.h4_failure = e.what();
    }
    return rep;
}

inline std::string format_report(const HypothesisReport& rep) {
    std::ostringstream os;
    os.precision(6);
    os << "H1 max |tau:grad u - tau:D(u)| (relative): " << rep.h1_residual << (rep.h1_residual <= 1e-12 ? "  ok" : "  FAIL")
       << '\n';
    os << "H2 " << HypothesisReport::h2_note << '\n';
    os << "H3 c_est = " << rep.coercivity.c_est << " (pointwise " << rep.coercivity.c_pointwise << ", "
       << (rep.coercivity.method == CoercivityReport::Method::FourierSymbol ? "fourier-symbol" : "rayleigh-sampling")
       << ", seed " << rep.coercivity.seed << ")" << (rep.coercivity.passed ? "  ok" : "  FAIL") << '\n';
    if (rep.h4_checked)
        os << "H4 symbol invertible on all nonzero grid wavevectors: " << (rep.h4_invertible ? "yes" : "no");
    else
        os << "H4 varying tensor: symbol check not applicable, solver built";
    if (!rep.h4_failure.empty()) os << " (" << rep.h4_failure << ")";
    os << "; sample norm of A^{-1} grad div in L^1.5: " << rep.h4_sample_norm << '\n';
    return os.str();
}

}  // namespace aniso_stokes
