#pragma once

#include "aniso_stokes/fft.hpp"
#include "aniso_stokes/grid.hpp"

namespace aniso_stokes::spectral {

inline const Complex I{0.0, 1.0};

/// Applies the symbol i*k_axis to a spectrum in place.
inline void apply_derivative(const Fft& fft, SpectralField& spec, int axis) {
    for (std::size_t s = 0; s < spec.size(); ++s) spec[s] *= I * fft.k(axis, s);
}

inline ScalarField partial(const ScalarField& f, int axis) {
    const auto& fft = Fft::for_grid(f.grid());
    auto spec = fft.forward(f);
    apply_derivative(fft, spec, axis);
    return fft.inverse(std::move(spec));
}

inline VectorField grad(const ScalarField& f) {
    const auto& fft = Fft::for_grid(f.grid());
    const auto spec = fft.forward(f);
    VectorField out(f.grid());
    for (int a = 0; a < f.grid().dim; ++a) {
        SpectralField d(spec.size());
        for (std::size_t s = 0; s < spec.size(); ++s) d[s] = I * fft.k(a, s) * spec[s];
        out[a] = fft.inverse(std::move(d));
    }
    return out;
}

inline ScalarField div(const VectorField& v) {
    const auto& fft = Fft::for_grid(v.grid());
    SpectralField acc(fft.spectral_size(), Complex{});
    for (int a = 0; a < v.dim(); ++a) {
        const auto spec = fft.forward(v[a]);
        for (std::size_t s = 0; s < spec.size(); ++s) acc[s] += I * fft.k(a, s) * spec[s];
    }
    return fft.inverse(std::move(acc));
}

/// Spectral Laplacian, symbol -|k|^2 with derivative wavenumbers (equals div(grad f)).
inline ScalarField laplacian(const ScalarField& f) {
    const auto& fft = Fft::for_grid(f.grid());
    auto spec = fft.forward(f);
    for (std::size_t s = 0; s < spec.size(); ++s) spec[s] *= -fft.k2(s);
    return fft.inverse(std::move(spec));
}

/// Velocity gradient, component (i,j) = d_j u_i.
inline TensorField grad_tensor(const VectorField& u) {
    const auto& fft = Fft::for_grid(u.grid());
    const int d = u.dim();
    TensorField out(u.grid());
    for (int i = 0; i < d; ++i) {
        const auto spec = fft.forward(u[i]);
        for (int j = 0; j < d; ++j) {
            SpectralField dj(spec.size());
            for (std::size_t s = 0; s < spec.size(); ++s) dj[s] = I * fft.k(j, s) * spec[s];
            out(i, j) = fft.inverse(std::move(dj));
        }
    }
    return out;
}

/// Symmetric gradient D(u) = (grad u + grad u^T) / 2.
inline TensorField sym_grad(const VectorField& u) {
    const auto& fft = Fft::for_grid(u.grid());
    const int d = u.dim();
    std::vector<SpectralField> specs;
    specs.reserve(d);
    for (int i = 0; i < d; ++i) specs.push_back(fft.forward(u[i]));
    TensorField out(u.grid());
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            SpectralField dij(fft.spectral_size());
            for (std::size_t s = 0; s < dij.size(); ++s)
                dij[s] = 0.5 * I * (fft.k(j, s) * specs[i][s] + fft.k(i, s) * specs[j][s]);
            out(i, j) = fft.inverse(std::move(dij));
            if (j != i) out(j, i) = out(i, j);
        }
    return out;
}

/// Row divergence of a tensor field, (div T)_i = sum_j d_j T_ij.
inline VectorField div_rows(const TensorField& t) {
    const auto& fft = Fft::for_grid(t.grid());
    const int d = t.dim();
    VectorField out(t.grid());
    for (int i = 0; i < d; ++i) {
        SpectralField acc(fft.spectral_size(), Complex{});
        for (int j = 0; j < d; ++j) {
            const auto spec = fft.forward(t(i, j));
            for (std::size_t s = 0; s < spec.size(); ++s) acc[s] += I * fft.k(j, s) * spec[s];
        }
        out[i] = fft.inverse(std::move(acc));
    }
    return out;
}

/// Removes every spectral component the derivative operators cannot see
/// (the mean and pure Nyquist modes), leaving the range of the momentum operator.
inline ScalarField project_range(const ScalarField& f) {
    const auto& fft = Fft::for_grid(f.grid());
    auto spec = fft.forward(f);
    for (std::size_t s = 0; s < spec.size(); ++s)
        if (fft.null_mode(s)) spec[s] = 0.0;
    return fft.inverse(std::move(spec));
}

}  // namespace aniso_stokes::spectral
