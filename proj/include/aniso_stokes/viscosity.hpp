#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <vector>

#include "aniso_stokes/errors.hpp"
#include "aniso_stokes/fft.hpp"
#include "aniso_stokes/grid.hpp"

namespace aniso_stokes {

/// Dense rank-4 array A_ijkl over dim^4 entries, index ((i*d + j)*d + k)*d + l.
struct Rank4 {
    int dim = 3;
    std::vector<double> a;

    Rank4() = default;
    explicit Rank4(int d) : dim(d), a(static_cast<std::size_t>(d * d * d * d), 0.0) {}

    static std::size_t index(int d, int i, int j, int k, int l) {
        return static_cast<std::size_t>(((i * d + j) * d + k) * d + l);
    }
    double& operator()(int i, int j, int k, int l) { return a[index(dim, i, j, k, l)]; }
    double operator()(int i, int j, int k, int l) const { return a[index(dim, i, j, k, l)]; }

    /// A_ijkl -> (A_ijkl + A_jikl + A_ijlk + A_jilk) / 4.
    Rank4 minor_symmetrized() const {
        Rank4 out(dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                for (int k = 0; k < dim; ++k)
                    for (int l = 0; l < dim; ++l)
                        out(i, j, k, l) = 0.25 * ((*this)(i, j, k, l) + (*this)(j, i, k, l) +
                                                  (*this)(i, j, l, k) + (*this)(j, i, l, k));
        return out;
    }

    /// max |A_ijkl - A_klij|.
    double major_asymmetry() const {
        double m = 0.0;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                for (int k = 0; k < dim; ++k)
                    for (int l = 0; l < dim; ++l)
                        m = std::max(m, std::abs((*this)(i, j, k, l) - (*this)(k, l, i, j)));
        return m;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : a) m = std::max(m, std::abs(v));
        return m;
    }

    /// Momentum symbol M_ik(k) = sum_jl A_ijkl k_j k_l of -div(A D(u)).
    Eigen::MatrixXd symbol(const double* kvec) const {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int k = 0; k < dim; ++k) {
                double s = 0.0;
                for (int j = 0; j < dim; ++j)
                    for (int l = 0; l < dim; ++l) s += (*this)(i, j, k, l) * kvec[j] * kvec[l];
                m(i, k) = s;
            }
        return m;
    }
};

/// Anisotropic viscosity tensor A_ijkl(t, x) with minor symmetries.
///
/// Three variants:
///   - DiagNu: per-axis coefficients nu_a > 0. Realized as
///     A_ijkl = c_ij c_kl (d_ik d_jl + d_il d_jk - d_ij d_kl) with c_ij = (nu_i nu_j)^(1/4),
///     the minor-symmetric tensor whose momentum symbol is diagonal,
///     M(k) = diag(sqrt(nu_i)) * sum_j sqrt(nu_j) k_j^2. For equal nu this is nu*Laplacian.
///   - ConstantFull: one dim^4 array, minor-symmetrized at construction.
///   - VaryingFull: a dim^4 array per cell at each time breakpoint, linear in time between
///     breakpoints and clamped outside them.
class ViscosityTensor {
public:
    enum class Kind { DiagNu, ConstantFull, VaryingFull };

    struct Breakpoint {
        double time = 0.0;
        /// Cell-major coefficients: cell c, entry ijkl at c*dim^4 + Rank4::index.
        std::vector<double> coeffs;
    };

    static ViscosityTensor diag(std::vector<double> nu) {
        if (nu.empty() || nu.size() > 3) throw DimensionMismatch("DiagNu needs 1 to 3 coefficients");
        for (double v : nu)
            if (!(v > 0.0) || !std::isfinite(v)) throw NotCoercive("DiagNu coefficients must be positive");
        ViscosityTensor t;
        t.kind_ = Kind::DiagNu;
        t.dim_ = static_cast<int>(nu.size());
        t.nu_ = std::move(nu);
        t.constant_ = t.diag_realization();
        return t;
    }

    static ViscosityTensor constant(Rank4 a) {
        for (double v : a.a)
            if (!std::isfinite(v)) throw DimensionMismatch("viscosity coefficients must be finite");
        ViscosityTensor t;
        t.kind_ = Kind::ConstantFull;
        t.dim_ = a.dim;
        t.constant_ = a.minor_symmetrized();
        return t;
    }

    /// tau = 2 mu D(u) + lambda (div u) Id.
    static ViscosityTensor isotropic(int dim, double mu, double lambda = 0.0) {
        Rank4 a(dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                for (int k = 0; k < dim; ++k)
                    for (int l = 0; l < dim; ++l)
                        a(i, j, k, l) = mu * ((i == k && j == l) + (i == l && j == k)) +
                                        lambda * (i == j && k == l);
        return constant(std::move(a));
    }

    static ViscosityTensor varying(const GridSpec& grid, std::vector<Breakpoint> breakpoints) {
        if (breakpoints.empty()) throw DimensionMismatch("varying viscosity needs a breakpoint");
        std::sort(breakpoints.begin(), breakpoints.end(),
                  [](const Breakpoint& a, const Breakpoint& b) { return a.time < b.time; });
        const int d = grid.dim;
        const std::size_t per = static_cast<std::size_t>(d * d * d * d);
        for (auto& bp : breakpoints) {
            if (bp.coeffs.size() != grid.size() * per)
                throw DimensionMismatch("varying viscosity coefficient array has the wrong size");
            for (std::size_t c = 0; c < grid.size(); ++c) {
                Rank4 cell(d);
                std::copy_n(bp.coeffs.begin() + static_cast<std::ptrdiff_t>(c * per), per, cell.a.begin());
                for (double v : cell.a)
                    if (!std::isfinite(v)) throw DimensionMismatch("viscosity coefficients must be finite");
                const Rank4 sym = cell.minor_symmetrized();
                std::copy(sym.a.begin(), sym.a.end(), bp.coeffs.begin() + static_cast<std::ptrdiff_t>(c * per));
            }
        }
        ViscosityTensor t;
        t.kind_ = Kind::VaryingFull;
        t.dim_ = d;
        t.grid_ = grid;
        t.breakpoints_ = std::make_shared<const std::vector<Breakpoint>>(std::move(breakpoints));
        return t;
    }

    /// Builds a single-breakpoint varying tensor from a per-cell generator Rank4(x0, x1, x2).
    template <class F>
    static ViscosityTensor varying_from(const GridSpec& grid, F&& gen) {
        const int d = grid.dim;
        const std::size_t per = static_cast<std::size_t>(d * d * d * d);
        Breakpoint bp;
        bp.coeffs.resize(grid.size() * per);
        for (std::size_t c = 0; c < grid.size(); ++c) {
            const auto idx = grid.unflat(c);
            const Rank4 cell = gen(grid.coord(0, idx[0]), d > 1 ? grid.coord(1, idx[1]) : 0.0,
                                   d > 2 ? grid.coord(2, idx[2]) : 0.0);
            if (cell.dim != d) throw DimensionMismatch("generator returned a tensor of the wrong dimension");
            std::copy(cell.a.begin(), cell.a.end(), bp.coeffs.begin() + static_cast<std::ptrdiff_t>(c * per));
        }
        return varying(grid, {std::move(bp)});
    }

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    const std::vector<double>& nu() const { return nu_; }
    bool is_constant() const { return kind_ != Kind::VaryingFull; }
    bool time_dependent() const { return kind_ == Kind::VaryingFull && breakpoints_->size() > 1; }
    const GridSpec& grid() const { return grid_; }
    const std::vector<Breakpoint>& breakpoints() const { return *breakpoints_; }

    /// Rank-4 array of a constant tensor (the DiagNu realization for DiagNu).
    const Rank4& constant_tensor() const {
        if (kind_ == Kind::VaryingFull) throw DimensionMismatch("varying tensor has no single constant array");
        return constant_;
    }

    /// Cell-major coefficients at time t for a varying tensor.
    std::vector<double> coefficients_at(double t) const {
        const auto& bps = *breakpoints_;
        if (t <= bps.front().time || bps.size() == 1) return bps.front().coeffs;
        if (t >= bps.back().time) return bps.back().coeffs;
        std::size_t m = 1;
        while (bps[m].time < t) ++m;
        const auto& lo = bps[m - 1];
        const auto& hi = bps[m];
        const double w = (t - lo.time) / (hi.time - lo.time);
        std::vector<double> out(lo.coeffs.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - w) * lo.coeffs[i] + w * hi.coeffs[i];
        return out;
    }

    /// Spatial average of the tensor at time t (the tensor itself when constant).
    Rank4 averaged(double t) const {
        if (kind_ != Kind::VaryingFull) return constant_;
        const auto coeffs = coefficients_at(t);
        Rank4 avg(dim_);
        const std::size_t per = avg.a.size();
        const std::size_t cells = coeffs.size() / per;
        for (std::size_t c = 0; c < cells; ++c)
            for (std::size_t e = 0; e < per; ++e) avg.a[e] += coeffs[c * per + e];
        for (double& v : avg.a) v /= static_cast<double>(cells);
        return avg;
    }

    /// Largest |A_ijkl - A_klij| over cells and breakpoints.
    double major_asymmetry() const {
        if (kind_ != Kind::VaryingFull) return constant_.major_asymmetry();
        double m = 0.0;
        const std::size_t per = static_cast<std::size_t>(dim_ * dim_ * dim_ * dim_);
        for (const auto& bp : *breakpoints_)
            for (std::size_t c = 0; c < grid_.size(); ++c) {
                Rank4 cell(dim_);
                std::copy_n(bp.coeffs.begin() + static_cast<std::ptrdiff_t>(c * per), per, cell.a.begin());
                m = std::max(m, cell.major_asymmetry());
            }
        return m;
    }

    ViscosityTensor scaled(double s) const {
        ViscosityTensor t = *this;
        for (double& v : t.nu_) v *= s;
        for (double& v : t.constant_.a) v *= s;
        if (kind_ == Kind::VaryingFull) {
            auto bps = *breakpoints_;
            for (auto& bp : bps)
                for (double& v : bp.coeffs) v *= s;
            t.breakpoints_ = std::make_shared<const std::vector<Breakpoint>>(std::move(bps));
        }
        return t;
    }

private:
    ViscosityTensor() = default;

    Rank4 diag_realization() const {
        Rank4 a(dim_);
        auto c = [&](int i, int j) { return std::pow(nu_[i] * nu_[j], 0.25); };
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j)
                for (int k = 0; k < dim_; ++k)
                    for (int l = 0; l < dim_; ++l)
                        a(i, j, k, l) = c(i, j) * c(k, l) *
                                        (double(i == k && j == l) + double(i == l && j == k) -
                                         double(i == j && k == l));
        return a;
    }

    Kind kind_ = Kind::DiagNu;
    int dim_ = 3;
    std::vector<double> nu_;
    Rank4 constant_;
    GridSpec grid_;
    std::shared_ptr<const std::vector<Breakpoint>> breakpoints_;
};

/// Stress tau_ij = A_ijkl [Du]_kl at time t. Du is assumed symmetric pointwise.
inline TensorField apply_tau(const ViscosityTensor& a, double t, const TensorField& du) {
    const auto& g = du.grid();
    const int d = g.dim;
    if (a.dim() != d) throw DimensionMismatch("viscosity tensor dimension differs from the grid");
    TensorField tau(g);
    if (a.kind() == ViscosityTensor::Kind::DiagNu) {
        const auto& nu = a.nu();
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                const double w = 2.0 * std::sqrt(nu[i] * nu[j]);
                const auto& src = du(i, j);
                auto& dst = tau(i, j);
                for (std::size_t c = 0; c < g.size(); ++c) dst[c] = w * src[c];
            }
        for (std::size_t c = 0; c < g.size(); ++c) {
            double trace = 0.0;
            for (int k = 0; k < d; ++k) trace += std::sqrt(nu[k]) * du(k, k)[c];
            for (int i = 0; i < d; ++i) tau(i, i)[c] -= std::sqrt(nu[i]) * trace;
        }
        return tau;
    }
    if (a.kind() == ViscosityTensor::Kind::ConstantFull) {
        const auto& A = a.constant_tensor();
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                auto& dst = tau(i, j);
                for (int k = 0; k < d; ++k)
                    for (int l = 0; l < d; ++l) {
                        const double w = A(i, j, k, l);
                        if (w == 0.0) continue;
                        const auto& src = du(k, l);
                        for (std::size_t c = 0; c < g.size(); ++c) dst[c] += w * src[c];
                    }
            }
        return tau;
    }
    require_same_grid(a.grid(), g);
    const auto coeffs = a.coefficients_at(t);
    const std::size_t per = static_cast<std::size_t>(d * d * d * d);
    for (std::size_t c = 0; c < g.size(); ++c) {
        const double* cell = &coeffs[c * per];
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double s = 0.0;
                for (int k = 0; k < d; ++k)
                    for (int l = 0; l < d; ++l) s += cell[Rank4::index(d, i, j, k, l)] * du(k, l)[c];
                tau(i, j)[c] = s;
            }
    }
    return tau;
}

struct CoercivityReport {
    enum class Method { FourierSymbol, RayleighSampling };
    double c_est = 0.0;
    Method method = Method::FourierSymbol;
    bool passed = false;
    std::uint64_t seed = 0;
    /// Smallest Rayleigh quotient (A D):D / |D|^2 over all symmetric D (pointwise bound).
    double c_pointwise = 0.0;
    int directions = 0;
};

namespace detail {

/// Smallest (A D):D / |D|^2 over D = sym(k (x) a), |k| = 1, as a generalized eigenvalue.
inline double realizable_min(const Rank4& a, const double* kunit) {
    const int d = a.dim;
    const Eigen::MatrixXd m = a.symbol(kunit);
    const Eigen::MatrixXd ms = 0.5 * (m + m.transpose());
    Eigen::VectorXd kv(d);
    for (int i = 0; i < d; ++i) kv(i) = kunit[i];
    const Eigen::MatrixXd n = 0.5 * (Eigen::MatrixXd::Identity(d, d) * kv.squaredNorm() + kv * kv.transpose());
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(ms, n, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

/// Smallest eigenvalue of A acting on symmetric matrices with the Frobenius inner product.
inline double pointwise_min(const Rank4& a) {
    const int d = a.dim;
    std::vector<Eigen::MatrixXd> basis;
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            Eigen::MatrixXd e = Eigen::MatrixXd::Zero(d, d);
            if (i == j) {
                e(i, i) = 1.0;
            } else {
                e(i, j) = e(j, i) = 1.0 / std::sqrt(2.0);
            }
            basis.push_back(std::move(e));
        }
    const int nb = static_cast<int>(basis.size());
    Eigen::MatrixXd q(nb, nb);
    for (int p = 0; p < nb; ++p) {
        Eigen::MatrixXd ae = Eigen::MatrixXd::Zero(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k)
                    for (int l = 0; l < d; ++l) ae(i, j) += a(i, j, k, l) * basis[p](k, l);
        for (int r = 0; r < nb; ++r) q(r, p) = (basis[r].array() * ae.array()).sum();
    }
    const Eigen::MatrixXd qs = 0.5 * (q + q.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(qs, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace detail

inline constexpr std::uint64_t default_coercivity_seed = 20240613;

/// Estimates the coercivity constant c of  int tau:grad u >= c int |D(u)|^2.
///
/// Constant tensors use the Fourier symbol: for each unit wavevector the minimum over
/// realizable strains D = sym(k (x) a) is a generalized eigenvalue, minimized over
/// `directions` seeded random directions, the coordinate axes, and every grid
/// wavevector when a grid is supplied (which makes the bound exact for grid fields).
/// Varying tensors take the minimum over cells of the pointwise Rayleigh quotient over
/// all symmetric matrices.
inline CoercivityReport coercivity_estimate(const ViscosityTensor& a, double t, const GridSpec* grid = nullptr,
                                            std::uint64_t seed = default_coercivity_seed,
                                            int directions = 2000) {
    CoercivityReport rep;
    rep.seed = seed;
    const int d = a.dim();
    if (a.kind() == ViscosityTensor::Kind::VaryingFull) {
        rep.method = CoercivityReport::Method::RayleighSampling;
        const auto coeffs = a.coefficients_at(t);
        const std::size_t per = static_cast<std::size_t>(d * d * d * d);
        double cmin = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < coeffs.size() / per; ++c) {
            Rank4 cell(d);
            std::copy_n(coeffs.begin() + static_cast<std::ptrdiff_t>(c * per), per, cell.a.begin());
            cmin = std::min(cmin, detail::pointwise_min(cell));
        }
        rep.c_est = cmin;
        rep.c_pointwise = cmin;
        rep.passed = rep.c_est > 0.0;
        return rep;
    }

    const Rank4& A = a.constant_tensor();
    rep.method = CoercivityReport::Method::FourierSymbol;
    rep.c_pointwise = detail::pointwise_min(A);
    double cmin = std::numeric_limits<double>::infinity();
    std::array<double, 3> kv{};
    for (int axis = 0; axis < d; ++axis) {
        kv.fill(0.0);
        kv[axis] = 1.0;
        cmin = std::min(cmin, detail::realizable_min(A, kv.data()));
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    if (d > 1) {
        for (int s = 0; s < directions; ++s) {
            double norm = 0.0;
            for (int i = 0; i < d; ++i) {
                kv[i] = normal(rng);
                norm += kv[i] * kv[i];
            }
            norm = std::sqrt(norm);
            if (norm == 0.0) continue;
            for (int i = 0; i < d; ++i) kv[i] /= norm;
            cmin = std::min(cmin, detail::realizable_min(A, kv.data()));
        }
        rep.directions = directions;
    }
    if (grid != nullptr && grid->dim == d) {
        const auto& fft = Fft::for_grid(*grid);
        for (std::size_t s = 0; s < fft.spectral_size(); ++s) {
            if (fft.null_mode(s)) continue;
            const double kn = std::sqrt(fft.k2(s));
            for (int i = 0; i < d; ++i) kv[i] = fft.k(i, s) / kn;
            cmin = std::min(cmin, detail::realizable_min(A, kv.data()));
        }
    }
    rep.c_est = cmin;
    rep.passed = rep.c_est > 0.0;
    return rep;
}

}  // namespace aniso_stokes
