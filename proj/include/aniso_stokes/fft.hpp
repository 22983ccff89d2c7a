#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "aniso_stokes/grid.hpp"

namespace aniso_stokes {

using Complex = std::complex<double>;
using SpectralField = std::vector<Complex>;

/// Real-to-complex transform for one grid shape, with precomputed wavenumber tables.
///
/// Spectral layout is row-major over (n0, ..., n_{d-1}/2+1): the last active axis is
/// halved. Instances are shared through `Fft::for_grid` and are immutable once built;
/// plans are executed through the new-array interface so concurrent calls are safe.
class Fft {
public:
    static const Fft& for_grid(const GridSpec& grid) {
        // planner mutex must outlive the registry that destroys plans at exit
        planner_mutex();
        static std::mutex registry_mutex;
        static std::map<std::vector<double>, std::unique_ptr<Fft>> registry;
        std::vector<double> key{static_cast<double>(grid.dim)};
        for (int a = 0; a < grid.dim; ++a) {
            key.push_back(grid.n[a]);
            key.push_back(grid.length[a]);
        }
        std::lock_guard lock(registry_mutex);
        auto& slot = registry[key];
        if (!slot) slot.reset(new Fft(grid));
        return *slot;
    }

    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;
    ~Fft() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(forward_plan_);
        fftw_destroy_plan(inverse_plan_);
    }

    const GridSpec& grid() const { return grid_; }
    std::size_t spectral_size() const { return spectral_size_; }

    SpectralField forward(const ScalarField& f) const {
        require_same_grid(grid_, f.grid());
        std::vector<double> in(f.raw());
        SpectralField out(spectral_size_);
        fftw_execute_dft_r2c(forward_plan_, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
        return out;
    }

    /// Inverse transform including the 1/N normalization. Consumes its input.
    ScalarField inverse(SpectralField spec) const {
        ScalarField out(grid_);
        fftw_execute_dft_c2r(inverse_plan_, reinterpret_cast<fftw_complex*>(spec.data()), out.raw().data());
        const double scale = 1.0 / static_cast<double>(grid_.size());
        for (double& v : out.raw()) v *= scale;
        return out;
    }

    /// Derivative wavenumber along axis a at spectral index s (Nyquist mode zeroed).
    double k(int axis, std::size_t s) const { return kd_[axis][s]; }
    /// Signed integer mode number along axis a at spectral index s.
    int mode(int axis, std::size_t s) const { return modes_[axis][s]; }
    /// |k|^2 with derivative wavenumbers; div(grad f) has symbol -k2.
    double k2(std::size_t s) const { return k2_[s]; }
    /// True when every derivative wavenumber vanishes (zero mode or pure Nyquist modes).
    bool null_mode(std::size_t s) const { return k2_[s] == 0.0; }
    /// Symbol of the second-order central difference Laplacian, sum_a (2 sin(k_a h/2)/h)^2.
    double k2_fd(std::size_t s) const { return k2_fd_[s]; }

private:
    explicit Fft(const GridSpec& grid) : grid_(grid) {
        grid.validate();
        const int d = grid.dim;
        std::vector<int> dims(grid.n.begin(), grid.n.begin() + d);
        std::vector<int> sdims = dims;
        sdims[d - 1] = dims[d - 1] / 2 + 1;
        spectral_size_ = 1;
        for (int v : sdims) spectral_size_ *= static_cast<std::size_t>(v);

        {
            std::vector<double> rbuf(grid.size());
            SpectralField cbuf(spectral_size_);
            std::lock_guard lock(planner_mutex());
            const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
            forward_plan_ = fftw_plan_dft_r2c(d, dims.data(), rbuf.data(),
                                              reinterpret_cast<fftw_complex*>(cbuf.data()), flags);
            inverse_plan_ = fftw_plan_dft_c2r(d, dims.data(), reinterpret_cast<fftw_complex*>(cbuf.data()),
                                              rbuf.data(), flags | FFTW_DESTROY_INPUT);
        }

        const double h = grid.h();
        kd_.assign(d, std::vector<double>(spectral_size_));
        modes_.assign(d, std::vector<int>(spectral_size_));
        k2_.assign(spectral_size_, 0.0);
        k2_fd_.assign(spectral_size_, 0.0);
        for (std::size_t s = 0; s < spectral_size_; ++s) {
            std::size_t rem = s;
            for (int a = d - 1; a >= 0; --a) {
                const int extent = sdims[a];
                const int m = static_cast<int>(rem % extent);
                rem /= extent;
                const int na = dims[a];
                const int signed_mode = (m <= na / 2) ? m : m - na;
                modes_[a][s] = signed_mode;
                const double base = two_pi / grid.length[a];
                const bool nyquist = (na % 2 == 0) && (m == na / 2);
                kd_[a][s] = nyquist ? 0.0 : base * signed_mode;
                k2_[s] += kd_[a][s] * kd_[a][s];
                const double fd = 2.0 * std::sin(0.5 * base * signed_mode * h) / h;
                k2_fd_[s] += fd * fd;
            }
        }
    }

    static std::mutex& planner_mutex() {
        static std::mutex m;
        return m;
    }

    GridSpec grid_;
    std::size_t spectral_size_ = 0;
    fftw_plan forward_plan_ = nullptr;
    fftw_plan inverse_plan_ = nullptr;
    std::vector<std::vector<double>> kd_;
    std::vector<std::vector<int>> modes_;
    std::vector<double> k2_;
    std::vector<double> k2_fd_;
};

}  // namespace aniso_stokes
