#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <vector>

#include "aniso_stokes/errors.hpp"
#include "aniso_stokes/fft.hpp"
#include "aniso_stokes/grid.hpp"
#include "aniso_stokes/log.hpp"
#include "aniso_stokes/spectral.hpp"
#include "aniso_stokes/viscosity.hpp"

namespace aniso_stokes {

struct StokesSettings {
    double rtol = 1e-8;
    int max_iter = 500;
    /// GMRES restart length for tensors without major symmetry.
    int restart = 40;
};

/// The anisotropic elliptic operator  A v = -div tau(t, x, D(v))  on mean-zero periodic fields.
///
/// Constant tensors are inverted exactly through their Fourier symbol. Varying tensors use
/// a matrix-free Krylov iteration preconditioned by the symbol of the spatially averaged
/// tensor: conjugate gradients when A has major symmetry, restarted GMRES otherwise.
/// Immutable after build; solve() is reentrant.
class StokesOperator {
public:
    enum class Mode { Symbol, Krylov };
    enum class KrylovMethod { ConjugateGradient, Gmres };

    static StokesOperator build(const ViscosityTensor& a, const GridSpec& grid, double t,
                                StokesSettings settings = {}, bool check_coercivity = true) {
        grid.validate();
        if (a.dim() != grid.dim) throw DimensionMismatch("viscosity tensor dimension differs from the grid");
        StokesOperator op(a, grid, t, settings);
        if (a.is_constant()) {
            op.mode_ = Mode::Symbol;
            op.build_symbol(a.constant_tensor(), a.kind() == ViscosityTensor::Kind::DiagNu, true);
        } else {
            require_same_grid(a.grid(), grid);
            op.mode_ = Mode::Krylov;
            const Rank4 avg = a.averaged(t);
            op.build_symbol(avg, false, false);
            const double scale = std::max(avg.max_abs(), 1e-300);
            op.method_ = a.major_asymmetry() <= 1e-12 * scale ? KrylovMethod::ConjugateGradient
                                                               : KrylovMethod::Gmres;
            if (op.method_ == KrylovMethod::Gmres)
                log::info("viscosity tensor lacks major symmetry; using restarted GMRES");
        }
        if (check_coercivity) {
            op.coercivity_ = coercivity_estimate(a, t, &grid);
            if (!op.coercivity_.passed) {
                std::ostringstream msg;
                msg << "viscosity tensor is not coercive (c_est = " << op.coercivity_.c_est << ")";
                throw NotCoercive(msg.str());
            }
        }
        return op;
    }

    Mode mode() const { return mode_; }
    KrylovMethod krylov_method() const { return method_; }
    const GridSpec& grid() const { return grid_; }
    double time() const { return t_; }
    const ViscosityTensor& tensor() const { return a_; }
    const CoercivityReport& coercivity() const { return coercivity_; }
    const StokesSettings& settings() const { return settings_; }

    /// Momentum symbol M(k) at spectral index s (of the averaged tensor in Krylov mode).
    Eigen::MatrixXd symbol(std::size_t s) const {
        const auto& fft = Fft::for_grid(grid_);
        double kv[3] = {0.0, 0.0, 0.0};
        for (int a = 0; a < grid_.dim; ++a) kv[a] = fft.k(a, s);
        return symbol_tensor_.symbol(kv);
    }

    /// A u = -div tau(D(u)), evaluated through the stress in physical space.
    VectorField apply(const VectorField& u) const {
        const auto tau = apply_tau(a_, t_, spectral::sym_grad(u));
        auto out = spectral::div_rows(tau);
        out *= -1.0;
        return out;
    }

    /// Solves A u = grad q with zero-mean u.
    VectorField solve(const ScalarField& q) const {
        require_same_grid(grid_, q.grid());
        return solve_rhs(spectral::grad(q));
    }

    /// Solves A u = P b where P drops the components outside the operator's range.
    VectorField solve_rhs(const VectorField& b, int* iterations = nullptr) const {
        require_same_grid(grid_, b.grid());
        int its = 0;
        VectorField u = mode_ == Mode::Symbol ? apply_inverse_symbol(b) : krylov(b, its);
        if (iterations != nullptr) *iterations = its;
        for (auto& comp : u) comp += -comp.mean();
        return u;
    }

    /// || A u - grad q ||_2.
    double residual(const VectorField& u, const ScalarField& q) const {
        auto r = apply(u);
        r -= spectral::grad(q);
        return r.l2_norm();
    }

private:
    StokesOperator(const ViscosityTensor& a, const GridSpec& grid, double t, StokesSettings settings)
        : a_(a), grid_(grid), t_(t), settings_(settings) {}

    void build_symbol(const Rank4& tensor, bool diagonal, bool strict) {
        symbol_tensor_ = tensor;
        const auto& fft = Fft::for_grid(grid_);
        const int d = grid_.dim;
        const std::size_t ns = fft.spectral_size();
        inverse_.assign(ns * static_cast<std::size_t>(d * d), 0.0);
        diagonal_ = diagonal;
        std::vector<double> sqrt_nu;
        if (diagonal) {
            for (double v : a_.nu()) sqrt_nu.push_back(std::sqrt(v));
        }
        const double scale = std::max(tensor.max_abs(), 1e-300);
        for (std::size_t s = 0; s < ns; ++s) {
            if (fft.null_mode(s)) continue;
            double* inv = &inverse_[s * static_cast<std::size_t>(d * d)];
            if (diagonal) {
                double w = 0.0;
                for (int j = 0; j < d; ++j) w += sqrt_nu[j] * fft.k(j, s) * fft.k(j, s);
                for (int i = 0; i < d; ++i) inv[i * d + i] = 1.0 / (sqrt_nu[i] * w);
                continue;
            }
            double kv[3] = {0.0, 0.0, 0.0};
            for (int a = 0; a < d; ++a) kv[a] = fft.k(a, s);
            const Eigen::MatrixXd m = tensor.symbol(kv);
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
            const double smin = svd.singularValues().minCoeff();
            if (!(smin > 1e-12 * scale * fft.k2(s))) {
                if (strict) {
                    std::ostringstream msg;
                    msg << "momentum symbol is singular at k = (";
                    for (int a = 0; a < d; ++a) msg << (a ? ", " : "") << fft.mode(a, s);
                    msg << ")";
                    throw SingularSymbol(msg.str());
                }
                // averaged preconditioner degenerate at this mode: fall back to 1/|k|^2
                for (int i = 0; i < d; ++i) inv[i * d + i] = 1.0 / (scale * fft.k2(s));
                continue;
            }
            const Eigen::MatrixXd minv = m.inverse();
            for (int i = 0; i < d; ++i)
                for (int k = 0; k < d; ++k) inv[i * d + k] = minv(i, k);
        }
    }

    VectorField apply_inverse_symbol(const VectorField& b) const {
        const auto& fft = Fft::for_grid(grid_);
        const int d = grid_.dim;
        std::vector<SpectralField> bh;
        bh.reserve(d);
        for (int i = 0; i < d; ++i) bh.push_back(fft.forward(b[i]));
        VectorField u(grid_);
        for (int i = 0; i < d; ++i) {
            SpectralField uh(fft.spectral_size(), Complex{});
            for (std::size_t s = 0; s < uh.size(); ++s) {
                const double* inv = &inverse_[s * static_cast<std::size_t>(d * d)];
                if (diagonal_) {
                    uh[s] = inv[i * d + i] * bh[i][s];
                } else {
                    Complex acc{};
                    for (int k = 0; k < d; ++k) acc += inv[i * d + k] * bh[k][s];
                    uh[s] = acc;
                }
            }
            u[i] = fft.inverse(std::move(uh));
        }
        return u;
    }

    static double dot(const VectorField& x, const VectorField& y) {
        double s = 0.0;
        for (int a = 0; a < x.dim(); ++a) {
            const auto& xa = x[a].raw();
            const auto& ya = y[a].raw();
            for (std::size_t c = 0; c < xa.size(); ++c) s += xa[c] * ya[c];
        }
        return s;
    }

    static void axpy(double alpha, const VectorField& x, VectorField& y) {
        for (int a = 0; a < x.dim(); ++a) {
            const auto& xa = x[a].raw();
            auto& ya = y[a].raw();
            for (std::size_t c = 0; c < xa.size(); ++c) ya[c] += alpha * xa[c];
        }
    }

    VectorField project(const VectorField& v) const {
        VectorField out(grid_);
        for (int a = 0; a < v.dim(); ++a) out[a] = spectral::project_range(v[a]);
        return out;
    }

    VectorField krylov(const VectorField& b_in, int& its) const {
        const VectorField b = project(b_in);
        const double bnorm = std::sqrt(dot(b, b));
        its = 0;
        if (bnorm == 0.0) return VectorField(grid_);
        return method_ == KrylovMethod::ConjugateGradient ? pcg(b, bnorm, its) : gmres(b, bnorm, its);
    }

    VectorField pcg(const VectorField& b, double bnorm, int& its) const {
        VectorField x(grid_);
        VectorField r = b;
        int it = 0;
        double rel = 1.0;
        while (it < settings_.max_iter) {
            VectorField z = apply_inverse_symbol(r);
            VectorField p = z;
            double rz = dot(r, z);
            while (it < settings_.max_iter) {
                const VectorField ap = apply(p);
                const double alpha = rz / dot(p, ap);
                axpy(alpha, p, x);
                axpy(-alpha, ap, r);
                ++it;
                rel = std::sqrt(dot(r, r)) / bnorm;
                if (rel <= settings_.rtol) break;
                z = apply_inverse_symbol(r);
                const double rz_new = dot(r, z);
                const double beta = rz_new / rz;
                rz = rz_new;
                for (int a = 0; a < p.dim(); ++a) {
                    auto& pa = p[a].raw();
                    const auto& za = z[a].raw();
                    for (std::size_t c = 0; c < pa.size(); ++c) pa[c] = za[c] + beta * pa[c];
                }
            }
            // guard against recurrence drift: confirm with the true residual
            r = b;
            axpy(-1.0, apply(x), r);
            rel = std::sqrt(dot(r, r)) / bnorm;
            if (rel <= settings_.rtol) break;
        }
        its = it;
        if (rel > settings_.rtol) throw KrylovNoConvergence(it, rel);
        return x;
    }

    /// Right-preconditioned restarted GMRES.
    VectorField gmres(const VectorField& b, double bnorm, int& its) const {
        const int m = std::max(2, settings_.restart);
        VectorField x(grid_);
        int it = 0;
        double rel = 1.0;
        while (it < settings_.max_iter) {
            VectorField r = b;
            axpy(-1.0, apply(x), r);
            double beta = std::sqrt(dot(r, r));
            rel = beta / bnorm;
            if (rel <= settings_.rtol) break;
            std::vector<VectorField> v;
            std::vector<VectorField> z;
            r *= 1.0 / beta;
            v.push_back(r);
            Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m + 1, m);
            std::vector<double> cs(m), sn(m), g(m + 1, 0.0);
            g[0] = beta;
            int j = 0;
            for (; j < m && it < settings_.max_iter; ++j, ++it) {
                z.push_back(apply_inverse_symbol(v[j]));
                VectorField w = apply(z[j]);
                for (int i = 0; i <= j; ++i) {
                    h(i, j) = dot(w, v[i]);
                    axpy(-h(i, j), v[i], w);
                }
                h(j + 1, j) = std::sqrt(dot(w, w));
                for (int i = 0; i < j; ++i) {
                    const double tmp = cs[i] * h(i, j) + sn[i] * h(i + 1, j);
                    h(i + 1, j) = -sn[i] * h(i, j) + cs[i] * h(i + 1, j);
                    h(i, j) = tmp;
                }
                const double denom = std::hypot(h(j, j), h(j + 1, j));
                cs[j] = h(j, j) / denom;
                sn[j] = h(j + 1, j) / denom;
                h(j, j) = denom;
                h(j + 1, j) = 0.0;
                g[j + 1] = -sn[j] * g[j];
                g[j] = cs[j] * g[j];
                const double hn = std::sqrt(dot(w, w));
                if (hn > 0.0) w *= 1.0 / hn;
                v.push_back(std::move(w));
                if (std::abs(g[j + 1]) / bnorm <= settings_.rtol) {
                    ++j;
                    ++it;
                    break;
                }
            }
            std::vector<double> y(j, 0.0);
            for (int i = j - 1; i >= 0; --i) {
                double s = g[i];
                for (int k = i + 1; k < j; ++k) s -= h(i, k) * y[k];
                y[i] = s / h(i, i);
            }
            for (int i = 0; i < j; ++i) axpy(y[i], z[i], x);
        }
        VectorField r = b;
        axpy(-1.0, apply(x), r);
        rel = std::sqrt(dot(r, r)) / bnorm;
        its = it;
        if (rel > settings_.rtol) throw KrylovNoConvergence(it, rel);
        return x;
    }

    ViscosityTensor a_;
    GridSpec grid_;
    double t_ = 0.0;
    StokesSettings settings_;
    Mode mode_ = Mode::Symbol;
    KrylovMethod method_ = KrylovMethod::ConjugateGradient;
    Rank4 symbol_tensor_;
    bool diagonal_ = false;
    std::vector<double> inverse_;
    CoercivityReport coercivity_;
};

}  // namespace aniso_stokes
