#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "aniso_stokes/errors.hpp"

namespace aniso_stokes {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Uniform periodic grid over a box of `length[a]` per axis, samples at x = i*h.
struct GridSpec {
    int dim = 1;
    std::array<int, 3> n{4, 1, 1};
    std::array<double, 3> length{two_pi, two_pi, two_pi};

    static GridSpec cube(int dim, int cells, double len = two_pi) {
        GridSpec g;
        g.dim = dim;
        for (int a = 0; a < 3; ++a) {
            g.n[a] = a < dim ? cells : 1;
            g.length[a] = len;
        }
        g.validate();
        return g;
    }

    void validate() const {
        if (dim < 1 || dim > 3) throw DimensionMismatch("grid dimension must be 1, 2 or 3");
        for (int a = 0; a < dim; ++a) {
            if (n[a] < 4) throw DimensionMismatch("grid needs at least 4 cells per axis");
            if (!(length[a] > 0.0)) throw DimensionMismatch("grid period must be positive");
        }
        const double h0 = length[0] / n[0];
        for (int a = 1; a < dim; ++a) {
            if (std::abs(length[a] / n[a] - h0) > 1e-12 * h0)
                throw DimensionMismatch("all axes must share one cell width");
        }
    }

    std::size_t size() const {
        std::size_t s = 1;
        for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(n[a]);
        return s;
    }
    double h() const { return length[0] / n[0]; }
    double cell_volume() const { return std::pow(h(), dim); }
    double volume() const {
        double v = 1.0;
        for (int a = 0; a < dim; ++a) v *= length[a];
        return v;
    }
    /// Extent along axis a, 1 for axes beyond dim.
    int extent(int a) const { return a < dim ? n[a] : 1; }

    std::size_t flat(int i0, int i1 = 0, int i2 = 0) const {
        return (static_cast<std::size_t>(i0) * extent(1) + i1) * extent(2) + i2;
    }
    std::array<int, 3> unflat(std::size_t idx) const {
        std::array<int, 3> out{};
        out[2] = static_cast<int>(idx % extent(2));
        idx /= extent(2);
        out[1] = static_cast<int>(idx % extent(1));
        out[0] = static_cast<int>(idx / extent(1));
        return out;
    }
    double coord(int axis, int i) const { return i * (length[axis] / n[axis]); }

    bool operator==(const GridSpec& o) const {
        if (dim != o.dim) return false;
        for (int a = 0; a < dim; ++a)
            if (n[a] != o.n[a] || length[a] != o.length[a]) return false;
        return true;
    }
};

inline void require_same_grid(const GridSpec& a, const GridSpec& b) {
    if (!(a == b)) throw DimensionMismatch("fields live on different grids");
}

class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const GridSpec& grid, double value = 0.0)
        : grid_(grid), data_(grid.size(), value) {}
    ScalarField(const GridSpec& grid, std::vector<double> data) : grid_(grid), data_(std::move(data)) {
        if (data_.size() != grid_.size()) throw DimensionMismatch("data length does not match grid");
    }

    /// Samples f(x0, x1, x2) at every grid point.
    template <class F>
    static ScalarField sample(const GridSpec& grid, F&& f) {
        ScalarField out(grid);
        for (std::size_t c = 0; c < grid.size(); ++c) {
            const auto idx = grid.unflat(c);
            out.data_[c] = f(grid.coord(0, idx[0]), grid.dim > 1 ? grid.coord(1, idx[1]) : 0.0,
                             grid.dim > 2 ? grid.coord(2, idx[2]) : 0.0);
        }
        return out;
    }

    const GridSpec& grid() const { return grid_; }
    std::size_t size() const { return data_.size(); }
    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }
    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double sum() const {
        double s = 0.0;
        for (double v : data_) s += v;
        return s;
    }
    double integral() const { return sum() * grid_.cell_volume(); }
    double mean() const { return sum() / static_cast<double>(data_.size()); }
    double min() const { return *std::min_element(data_.begin(), data_.end()); }
    double max() const { return *std::max_element(data_.begin(), data_.end()); }
    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }
    /// Discrete L^p norm (sum |f|^p * cell volume)^(1/p).
    double lp_norm(double p) const {
        double s = 0.0;
        for (double v : data_) s += std::pow(std::abs(v), p);
        return std::pow(s * grid_.cell_volume(), 1.0 / p);
    }
    double l2_norm() const {
        double s = 0.0;
        for (double v : data_) s += v * v;
        return std::sqrt(s * grid_.cell_volume());
    }
    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
    }

    template <class F>
    ScalarField map(F&& f) const {
        ScalarField out(grid_);
        for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = f(data_[i]);
        return out;
    }

    ScalarField& operator+=(const ScalarField& o) {
        require_same_grid(grid_, o.grid_);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    ScalarField& operator-=(const ScalarField& o) {
        require_same_grid(grid_, o.grid_);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    ScalarField& operator*=(double s) {
        for (double& v : data_) v *= s;
        return *this;
    }
    ScalarField& operator+=(double s) {
        for (double& v : data_) v += s;
        return *this;
    }

private:
    GridSpec grid_;
    std::vector<double> data_;
};

inline ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
inline ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
inline ScalarField operator*(double s, ScalarField a) { return a *= s; }

/// Pointwise product.
inline ScalarField hadamard(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid(), b.grid());
    ScalarField out(a.grid());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

/// Discrete L^2 inner product.
inline double inner(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid(), b.grid());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s * a.grid().cell_volume();
}

class VectorField {
public:
    VectorField() = default;
    explicit VectorField(const GridSpec& grid) : grid_(grid), comps_(grid.dim, ScalarField(grid)) {}
    explicit VectorField(std::vector<ScalarField> comps) : comps_(std::move(comps)) {
        if (comps_.empty()) throw DimensionMismatch("vector field needs components");
        grid_ = comps_.front().grid();
        if (static_cast<int>(comps_.size()) != grid_.dim)
            throw DimensionMismatch("vector field needs one component per axis");
        for (const auto& c : comps_) require_same_grid(grid_, c.grid());
    }

    const GridSpec& grid() const { return grid_; }
    int dim() const { return grid_.dim; }
    ScalarField& operator[](int i) { return comps_[i]; }
    const ScalarField& operator[](int i) const { return comps_[i]; }
    auto begin() { return comps_.begin(); }
    auto end() { return comps_.end(); }
    auto begin() const { return comps_.begin(); }
    auto end() const { return comps_.end(); }

    VectorField& operator+=(const VectorField& o) {
        for (int i = 0; i < dim(); ++i) comps_[i] += o.comps_[i];
        return *this;
    }
    VectorField& operator-=(const VectorField& o) {
        for (int i = 0; i < dim(); ++i) comps_[i] -= o.comps_[i];
        return *this;
    }
    VectorField& operator*=(double s) {
        for (auto& c : comps_) c *= s;
        return *this;
    }

    /// Pointwise Euclidean magnitude.
    ScalarField magnitude() const {
        ScalarField out(grid_);
        for (std::size_t c = 0; c < grid_.size(); ++c) {
            double s = 0.0;
            for (const auto& comp : comps_) s += comp[c] * comp[c];
            out[c] = std::sqrt(s);
        }
        return out;
    }
    double l2_norm() const {
        double s = 0.0;
        for (const auto& c : comps_) {
            const double n = c.l2_norm();
            s += n * n;
        }
        return std::sqrt(s);
    }
    bool all_finite() const {
        return std::all_of(comps_.begin(), comps_.end(), [](const ScalarField& c) { return c.all_finite(); });
    }

private:
    GridSpec grid_;
    std::vector<ScalarField> comps_;
};

inline VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
inline VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
inline VectorField operator*(double s, VectorField a) { return a *= s; }

inline double inner(const VectorField& a, const VectorField& b) {
    double s = 0.0;
    for (int i = 0; i < a.dim(); ++i) s += inner(a[i], b[i]);
    return s;
}

/// dim x dim tensor-valued field, component (i,j) stored at i*dim+j.
class TensorField {
public:
    TensorField() = default;
    explicit TensorField(const GridSpec& grid)
        : grid_(grid), comps_(static_cast<std::size_t>(grid.dim * grid.dim), ScalarField(grid)) {}

    const GridSpec& grid() const { return grid_; }
    int dim() const { return grid_.dim; }
    ScalarField& operator()(int i, int j) { return comps_[i * grid_.dim + j]; }
    const ScalarField& operator()(int i, int j) const { return comps_[i * grid_.dim + j]; }

    TensorField& operator+=(const TensorField& o) {
        for (std::size_t c = 0; c < comps_.size(); ++c) comps_[c] += o.comps_[c];
        return *this;
    }
    TensorField& operator*=(double s) {
        for (auto& c : comps_) c *= s;
        return *this;
    }

    /// max over cells and index pairs of |T_ij - T_ji|.
    double asymmetry() const {
        double m = 0.0;
        for (int i = 0; i < dim(); ++i)
            for (int j = i + 1; j < dim(); ++j)
                for (std::size_t c = 0; c < grid_.size(); ++c)
                    m = std::max(m, std::abs((*this)(i, j)[c] - (*this)(j, i)[c]));
        return m;
    }

private:
    GridSpec grid_;
    std::vector<ScalarField> comps_;
};

/// Pointwise double contraction S:T.
inline ScalarField contract(const TensorField& s, const TensorField& t) {
    require_same_grid(s.grid(), t.grid());
    ScalarField out(s.grid());
    const int d = s.dim();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const auto& a = s(i, j);
            const auto& b = t(i, j);
            for (std::size_t c = 0; c < out.size(); ++c) out[c] += a[c] * b[c];
        }
    return out;
}

}  // namespace aniso_stokes
