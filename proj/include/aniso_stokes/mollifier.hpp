#pragma once

#include <cmath>
#include <sstream>
#include <vector>

#include "aniso_stokes/grid.hpp"
#include "aniso_stokes/log.hpp"
#include "aniso_stokes/spectral.hpp"

namespace aniso_stokes {

/// Unnormalized C-infinity bump on the unit ball, equal to 1 at the origin.
inline double bump_profile(double r) {
    if (r >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - r * r));
}

/// Radial bump of radius `delta` sampled on the grid stencil and renormalized to unit sum.
///
/// The stencil holds every offset with |x| < delta. Weights are nonnegative, even under
/// index reflection, and sum to one, so convolution preserves means, nonnegativity and
/// the sup norm bound. A radius below one cell width degrades to the identity.
class MollifierKernel {
public:
    struct Tap {
        std::array<int, 3> offset;
        double weight;
    };

    MollifierKernel(double delta, const GridSpec& grid) : delta_(delta), grid_(grid) {
        const double h = grid.h();
        if (!(delta >= h)) {
            if (delta > 0.0) {
                std::ostringstream msg;
                msg << "mollifier radius " << delta << " is below the cell width " << h
                    << "; using the identity";
                log::warn_once(msg.str());
            }
            taps_.push_back({{0, 0, 0}, 1.0});
            return;
        }
        const int reach = static_cast<int>(std::floor(delta / h));
        const int r1 = grid.dim > 1 ? reach : 0;
        const int r2 = grid.dim > 2 ? reach : 0;
        double total = 0.0;
        for (int a = -reach; a <= reach; ++a)
            for (int b = -r1; b <= r1; ++b)
                for (int c = -r2; c <= r2; ++c) {
                    const double dist = h * std::sqrt(double(a * a + b * b + c * c));
                    const double w = bump_profile(dist / delta);
                    if (w <= 0.0) continue;
                    taps_.push_back({{a, b, c}, w});
                    total += w;
                }
        for (auto& t : taps_) t.weight /= total;
    }

    double delta() const { return delta_; }
    const GridSpec& grid() const { return grid_; }
    const std::vector<Tap>& taps() const { return taps_; }
    bool is_identity() const { return taps_.size() == 1; }

private:
    double delta_;
    GridSpec grid_;
    std::vector<Tap> taps_;
};

/// Periodic discrete convolution with the kernel.
inline ScalarField mollify(const ScalarField& f, const MollifierKernel& kernel) {
    require_same_grid(f.grid(), kernel.grid());
    if (kernel.is_identity()) return f;
    const auto& g = f.grid();
    const int n0 = g.extent(0), n1 = g.extent(1), n2 = g.extent(2);
    ScalarField out(g);
    const auto& src = f.raw();
    auto& dst = out.raw();
    std::vector<int> w1(n1), w2(n2);
    for (const auto& tap : kernel.taps()) {
        const auto [o0, o1, o2] = tap.offset;
        for (int j = 0; j < n1; ++j) w1[j] = ((j - o1) % n1 + n1) % n1;
        for (int k = 0; k < n2; ++k) w2[k] = ((k - o2) % n2 + n2) % n2;
        for (int i = 0; i < n0; ++i) {
            const int si = ((i - o0) % n0 + n0) % n0;
            for (int j = 0; j < n1; ++j) {
                const double* srow = &src[(static_cast<std::size_t>(si) * n1 + w1[j]) * n2];
                double* drow = &dst[(static_cast<std::size_t>(i) * n1 + j) * n2];
                for (int k = 0; k < n2; ++k) drow[k] += tap.weight * srow[w2[k]];
            }
        }
    }
    return out;
}

inline VectorField mollify(const VectorField& v, const MollifierKernel& kernel) {
    if (kernel.is_identity()) return v;
    VectorField out(v.grid());
    for (int a = 0; a < v.dim(); ++a) out[a] = mollify(v[a], kernel);
    return out;
}

/// Pointwise transport-form commutator r = (u . grad rho)_delta - u . grad(rho_delta).
inline ScalarField commutator_field(const ScalarField& rho, const VectorField& u, double delta) {
    require_same_grid(rho.grid(), u.grid());
    const MollifierKernel kernel(delta, rho.grid());
    const auto grad_rho = spectral::grad(rho);
    const auto grad_rho_delta = spectral::grad(mollify(rho, kernel));
    ScalarField advect(rho.grid()), advect_delta(rho.grid());
    for (int a = 0; a < u.dim(); ++a)
        for (std::size_t c = 0; c < rho.size(); ++c) {
            advect[c] += u[a][c] * grad_rho[a][c];
            advect_delta[c] += u[a][c] * grad_rho_delta[a][c];
        }
    return mollify(advect, kernel) - advect_delta;
}

/// Discrete L^1 norm of the commutator at radius delta.
inline double commutator_residual(const ScalarField& rho, const VectorField& u, double delta) {
    return commutator_field(rho, u, delta).lp_norm(1.0);
}

}  // namespace aniso_stokes
