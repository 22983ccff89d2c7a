#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "aniso_stokes/errors.hpp"
#include "aniso_stokes/grid.hpp"
#include "aniso_stokes/spectral.hpp"
#include "aniso_stokes/viscosity.hpp"

namespace aniso_stokes {

struct ViscousWork {
    double total = 0.0;
    ScalarField pointwise;     ///< tau : grad u
    double h1_residual = 0.0;  ///< max |tau : grad u - tau : D(u)|
};

inline ViscousWork viscous_work(const ViscosityTensor& a, double t, const VectorField& u) {
    const auto du = spectral::sym_grad(u);
    const auto tau = apply_tau(a, t, du);
    ViscousWork out;
    out.pointwise = contract(tau, spectral::grad_tensor(u));
    out.total = out.pointwise.integral();
    out.h1_residual = (out.pointwise - contract(tau, du)).max_abs();
    return out;
}

/// F = rho^gamma - nu div u, the classical effective flux of an isotropic run.
inline ScalarField effective_flux(const ScalarField& rho, const VectorField& u, double nu, double gamma) {
    auto f = rho.map([gamma](double r) { return std::pow(r, gamma); });
    f -= nu * spectral::div(u);
    return f;
}

struct DefectParams {
    int window = 8;        ///< cells per window edge
    double h_reg = 1e-8;   ///< regularization of the 1/gamma root
};

/// Coarse-grained pressure defect:
///   sum over windows of vol_w (h + <rho^gamma>_w - <rho>_w^gamma)^{1/gamma} - vol h^{1/gamma}.
/// Windows are cubes of `window` cells along every active axis. A window of one cell gives 0.
inline double defect_proxy(const ScalarField& rho, double gamma, const DefectParams& dp) {
    const auto& g = rho.grid();
    if (dp.window < 1) throw WindowMismatch("defect window must contain at least one cell");
    if (!(dp.h_reg >= 0.0)) throw WindowMismatch("defect regularization must be >= 0");
    for (int a = 0; a < g.dim; ++a)
        if (g.n[a] % dp.window != 0) {
            std::ostringstream msg;
            msg << "window of " << dp.window << " cells does not divide axis " << a << " (" << g.n[a] << " cells)";
            throw WindowMismatch(msg.str());
        }
    const int w = dp.window;
    const int w1 = g.dim > 1 ? w : 1, w2 = g.dim > 2 ? w : 1;
    const int b0 = g.extent(0) / w, b1 = g.extent(1) / w1, b2 = g.extent(2) / w2;
    const double cells = static_cast<double>(w) * w1 * w2;
    const double vol_w = cells * g.cell_volume();
    const double inv_gamma = 1.0 / gamma;
    double total = 0.0;
    for (int i = 0; i < b0; ++i)
        for (int j = 0; j < b1; ++j)
            for (int k = 0; k < b2; ++k) {
                double m1 = 0.0, mg = 0.0;
                for (int a = 0; a < w; ++a)
                    for (int b = 0; b < w1; ++b)
                        for (int c = 0; c < w2; ++c) {
                            const double r = rho[g.flat(i * w + a, j * w1 + b, k * w2 + c)];
                            m1 += r;
                            mg += std::pow(r, gamma);
                        }
                m1 /= cells;
                mg /= cells;
                const double gap = std::max(mg - std::pow(m1, gamma), 0.0);
                total += vol_w * std::pow(dp.h_reg + gap, inv_gamma);
            }
    return std::max(total - g.volume() * std::pow(dp.h_reg, inv_gamma), 0.0);
}

/// One stored time sample of every audited functional.
struct DiagnosticsRow {
    double t = 0.0;
    double mass = 0.0;
    double drag2g_cum = 0.0;
    double drag3_cum = 0.0;
    double pgamma_integral = 0.0;
    double dissipation_cum = 0.0;  ///< (gamma - 1) int int tau : grad u
    double grad_rho_gamma_half_cum = 0.0;
    double energy_slack = 0.0;
    double rho_min = 0.0;
    double rho_max = 0.0;
    double pgamma_l2_running = 0.0;
    double defect_proxy = 0.0;
    double commutator_l1 = 0.0;
};

inline const char* csv_header() {
    return "t,mass,drag2g_cum,drag3_cum,pgamma_integral,dissipation_cum,grad_rho_gamma_half_cum,"
           "energy_slack,rho_min,rho_max,pgamma_l2_running,defect_proxy,commutator_l1";
}

inline std::string csv_line(const DiagnosticsRow& r) {
    std::ostringstream os;
    os.precision(17);
    os << r.t << ',' << r.mass << ',' << r.drag2g_cum << ',' << r.drag3_cum << ',' << r.pgamma_integral << ','
       << r.dissipation_cum << ',' << r.grad_rho_gamma_half_cum << ',' << r.energy_slack << ',' << r.rho_min << ','
       << r.rho_max << ',' << r.pgamma_l2_running << ',' << r.defect_proxy << ',' << r.commutator_l1;
    return os.str();
}

inline void write_csv(const std::filesystem::path& path, const std::vector<DiagnosticsRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << csv_header() << '\n';
    for (const auto& r : rows) out << csv_line(r) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace aniso_stokes
