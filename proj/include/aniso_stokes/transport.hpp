#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "aniso_stokes/errors.hpp"
#include "aniso_stokes/fft.hpp"
#include "aniso_stokes/grid.hpp"
#include "aniso_stokes/spectral.hpp"
#include "aniso_stokes/stokes.hpp"

namespace aniso_stokes {

/// Physical and numerical parameters of the regularized system.
struct SolverParams {
    double gamma = 2.0;
    double eps = 0.01;    ///< density diffusion
    double delta = 0.2;   ///< mollification radius
    double eta = 0.01;    ///< drag coefficient
    double cfl = 0.45;
    double dt_max = 1e-2;
    double fp_tol = 1e-7;
    int fp_max_iter = 50;
    int order = 1;        ///< 1 = upwind, 2 = minmod-limited reconstruction
    StokesSettings stokes;

    void validate() const {
        if (!(gamma > 1.0) || !std::isfinite(gamma)) throw Error("params.gamma must be > 1");
        if (!(eps >= 0.0)) throw Error("params.eps must be >= 0");
        if (!(delta >= 0.0)) throw Error("params.delta must be >= 0");
        if (!(eta >= 0.0)) throw Error("params.eta must be >= 0");
        if (!(cfl > 0.0 && cfl <= 1.0)) throw Error("transport.cfl must lie in (0, 1]");
        if (!(dt_max > 0.0)) throw Error("transport.dt_max must be positive");
        if (!(fp_tol > 0.0)) throw Error("run.fp_tol must be positive");
        if (fp_max_iter < 1) throw Error("run.fp_max_iter must be >= 1");
        if (order != 1 && order != 2) throw Error("transport.order must be 1 or 2");
        if (!(stokes.rtol > 0.0) || stokes.max_iter < 1) throw Error("invalid Stokes solver settings");
    }
};

/// Quantities removed or dissipated during one continuity step.
struct StepIncrement {
    double drag2g = 0.0;           ///< mass removed by the rho^{2 gamma} channel
    double drag3 = 0.0;            ///< mass removed by the rho^3 channel
    double grad_gamma_half = 0.0;  ///< 4 eps (1 - 1/gamma) dt int |grad rho^{gamma/2}|^2
};

struct MassLedger {
    double mass_now = 0.0;
    double drag2g_cum = 0.0;
    double drag3_cum = 0.0;
    double grad_rho_gamma_half_cum = 0.0;

    static MassLedger start(const ScalarField& rho) { return MassLedger{rho.integral(), 0.0, 0.0, 0.0}; }

    void add(const StepIncrement& inc, const ScalarField& rho_after) {
        mass_now = rho_after.integral();
        drag2g_cum += inc.drag2g;
        drag3_cum += inc.drag3;
        grad_rho_gamma_half_cum += inc.grad_gamma_half;
    }
    /// mass_now + drag removals; equals the initial mass up to rounding.
    double balance() const { return mass_now + drag2g_cum + drag3_cum; }
};

struct StepResult {
    ScalarField rho;
    StepIncrement increment;
};

/// Advective speed used by the time-step bound: sum over axes of max |v_a|.
inline double advective_speed(const VectorField& v) {
    double speed = 0.0;
    for (int a = 0; a < v.dim(); ++a) speed += v[a].max_abs();
    return speed;
}

/// Largest admissible step: min(dt_max, cfl h / speed). Diffusion and drag are implicit
/// and impose no bound of their own.
inline double cfl_dt(const VectorField& v, const SolverParams& params) {
    const double speed = std::max(advective_speed(v), std::numeric_limits<double>::min());
    return std::min(params.dt_max, params.cfl * v.grid().h() / speed);
}

inline ScalarField pressure_field(const ScalarField& rho, double gamma) {
    if (rho.min() < 0.0) throw NegativeInput("pressure of a negative density");
    return rho.map([gamma](double r) { return std::pow(r, gamma); });
}

namespace detail {

/// Periodic neighbour tables: plus[a][c] and minus[a][c] are the cells adjacent to c along axis a.
struct Neighbours {
    std::vector<std::vector<std::size_t>> plus, minus;

    explicit Neighbours(const GridSpec& g) : plus(g.dim), minus(g.dim) {
        const std::size_t n = g.size();
        for (int a = 0; a < g.dim; ++a) {
            plus[a].resize(n);
            minus[a].resize(n);
        }
        for (std::size_t c = 0; c < n; ++c) {
            const auto idx = g.unflat(c);
            for (int a = 0; a < g.dim; ++a) {
                auto up = idx, dn = idx;
                up[a] = (idx[a] + 1) % g.n[a];
                dn[a] = (idx[a] + g.n[a] - 1) % g.n[a];
                plus[a][c] = g.flat(up[0], up[1], up[2]);
                minus[a][c] = g.flat(dn[0], dn[1], dn[2]);
            }
        }
    }
};

inline double minmod(double a, double b) {
    if (a * b <= 0.0) return 0.0;
    return std::abs(a) < std::abs(b) ? a : b;
}

}  // namespace detail

/// Discrete divergence seen by the advection scheme: face velocities are neighbour averages,
/// so this is the central difference (v_a[c+] - v_a[c-]) / (2h) summed over axes.
inline ScalarField face_divergence(const VectorField& v) {
    const auto& g = v.grid();
    const detail::Neighbours nb(g);
    ScalarField out(g);
    const double inv2h = 0.5 / g.h();
    for (int a = 0; a < g.dim; ++a)
        for (std::size_t c = 0; c < g.size(); ++c)
            out[c] += (v[a][nb.plus[a][c]] - v[a][nb.minus[a][c]]) * inv2h;
    return out;
}

/// Conservative finite-volume advection, one forward Euler step of d_t rho + div(rho v) = 0.
inline ScalarField advect(const ScalarField& rho, const VectorField& v, double dt, int order = 1) {
    const auto& g = rho.grid();
    const detail::Neighbours nb(g);
    const std::size_t n = g.size();
    ScalarField out = rho;
    std::vector<double> flux(n);
    const double ratio = dt / g.h();
    for (int a = 0; a < g.dim; ++a) {
        const auto& va = v[a];
        const auto& up = nb.plus[a];
        const auto& dn = nb.minus[a];
        // flux[c] lives on the face between c and its upper neighbour
        for (std::size_t c = 0; c < n; ++c) {
            const std::size_t cp = up[c];
            const double vf = 0.5 * (va[c] + va[cp]);
            double left = rho[c], right = rho[cp];
            if (order == 2) {
                left += 0.5 * detail::minmod(rho[c] - rho[dn[c]], rho[cp] - rho[c]);
                right -= 0.5 * detail::minmod(rho[cp] - rho[c], rho[up[cp]] - rho[cp]);
            }
            flux[c] = vf > 0.0 ? vf * left : vf * right;
        }
        for (std::size_t c = 0; c < n; ++c) out[c] -= ratio * (flux[c] - flux[dn[c]]);
    }
    return out;
}

/// Implicit diffusion (I - eps dt L) rho_new = rho with L the second-order difference Laplacian,
/// diagonalized by the FFT. The operator is an M-matrix, so positivity and the maximum
/// principle carry over; the mean is untouched.
inline ScalarField diffuse_implicit(const ScalarField& rho, double eps, double dt) {
    if (eps == 0.0 || dt == 0.0) return rho;
    const auto& fft = Fft::for_grid(rho.grid());
    auto spec = fft.forward(rho);
    for (std::size_t s = 0; s < spec.size(); ++s) spec[s] /= 1.0 + eps * dt * fft.k2_fd(s);
    auto out = fft.inverse(std::move(spec));
    // roundoff can leave values of order 1e-17 below zero next to vacuum
    for (double& r : out.raw()) r = std::max(r, 0.0);
    return out;
}

/// Root r >= 0 of r + dt eta (r^{2 gamma} + r^3) = s for s >= 0.
inline double drag_solve(double s, double dt, double eta, double gamma) {
    if (s <= 0.0 || eta == 0.0 || dt == 0.0) return std::max(s, 0.0);
    const double c = dt * eta;
    const double p = 2.0 * gamma;
    auto g = [&](double r) { return r + c * (std::pow(r, p) + r * r * r) - s; };
    double lo = 0.0, hi = s;
    double r = s;
    for (int it = 0; it < 200; ++it) {
        const double gr = g(r);
        if (gr == 0.0) return r;
        if (gr > 0.0)
            hi = r;
        else
            lo = r;
        const double dg = 1.0 + c * (p * std::pow(r, p - 1.0) + 3.0 * r * r);
        double next = r - gr / dg;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - r) <= 1e-15 * s) return next;
        r = next;
    }
    std::ostringstream msg;
    msg << "drag solve did not converge for s=" << s;
    throw NewtonFail(msg.str());
}

/// 4 eps (1 - 1/gamma) int |grad rho^{gamma/2}|^2, spectral differentiation.
inline double gamma_half_dissipation_rate(const ScalarField& rho, double eps, double gamma) {
    if (eps == 0.0) return 0.0;
    const auto root = rho.map([gamma](double r) { return std::pow(std::max(r, 0.0), 0.5 * gamma); });
    const auto grad = spectral::grad(root);
    double sq = 0.0;
    for (int a = 0; a < grad.dim(); ++a) sq += inner(grad[a], grad[a]);
    return 4.0 * eps * (1.0 - 1.0 / gamma) * sq;
}

/// One Lie-split step: advection, implicit diffusion, implicit drag.
inline StepResult continuity_step(const ScalarField& rho, const VectorField& v, double dt,
                                  const SolverParams& params) {
    require_same_grid(rho.grid(), v.grid());
    if (rho.min() < 0.0) throw NegativeInput("continuity step received a negative density");
    if (dt < 0.0) throw CflViolation("negative time step");
    const double bound = cfl_dt(v, params);
    if (dt > bound * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "time step " << dt << " exceeds the admissible bound " << bound;
        throw CflViolation(msg.str());
    }

    StepResult res{rho, {}};
    if (dt == 0.0) return res;
    if (advective_speed(v) > 0.0) {
        res.rho = advect(rho, v, dt, params.order);
        if (params.order == 2) {
            for (double& r : res.rho.raw()) r = std::max(r, 0.0);
        }
    }
    res.rho = diffuse_implicit(res.rho, params.eps, dt);

    if (params.eta > 0.0) {
        const double vol = rho.grid().cell_volume();
        const double p = 2.0 * params.gamma;
        for (double& s : res.rho.raw()) {
            const double r = drag_solve(s, dt, params.eta, params.gamma);
            const double removed = s - r;
            if (removed > 0.0) {
                const double a = std::pow(r, p), b = r * r * r;
                const double share = (a + b) > 0.0 ? a / (a + b) : 0.5;
                const double d2g = removed * share;
                res.increment.drag2g += d2g * vol;
                res.increment.drag3 += (removed - d2g) * vol;
            }
            s = r;
        }
    }
    res.increment.grad_gamma_half = dt * gamma_half_dissipation_rate(res.rho, params.eps, params.gamma);
    return res;
}

}  // namespace aniso_stokes
