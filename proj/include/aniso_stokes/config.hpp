#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "aniso_stokes/coupled.hpp"
#include "aniso_stokes/errors.hpp"
#include "aniso_stokes/grid.hpp"
#include "aniso_stokes/log.hpp"
#include "aniso_stokes/snapshot.hpp"
#include "aniso_stokes/viscosity.hpp"

namespace aniso_stokes {

struct ViscositySpec {
    std::string kind = "diag";            ///< diag | constant | varying
    std::vector<double> nu{1.0};          ///< one value (broadcast) or one per axis
    std::vector<double> entries;          ///< dim^4 row-major entries for kind = constant
    std::vector<double> lame;             ///< mu, lambda for kind = constant without entries
    std::vector<std::string> paths;       ///< coefficient file prefixes for kind = varying
    double modulation = 0.1;              ///< built-in varying profile when no path is given
};

struct InitialSpec {
    std::string kind = "cosine";  ///< constant | bump | cosine | oscillatory
    double value = 1.0;
    double amplitude = 0.2;
    int mode = 1;
    double width = 0.5;
    double wavelength = two_pi / 16.0;
    double osc_amplitude = 0.5;
    std::string base = "constant";  ///< base profile of the oscillatory kind
};

struct ForcingSpec {
    std::string kind = "zero";  ///< zero | cosine | file
    double amplitude = 0.0;
    int mode = 1;
    std::vector<std::string> paths;
};

struct RunConfig {
    GridSpec grid = GridSpec::cube(2, 64);
    SolverParams params;
    ViscositySpec viscosity;
    InitialSpec init;
    ForcingSpec forcing;
    double t_end = 0.1;
    double slab = 0.05;
    std::string output = "out";
    int store_every = 10;
    std::uint64_t seed = default_coercivity_seed;
    std::vector<double> sweep_deltas{0.4, 0.2, 0.1, 0.05};
    std::vector<double> sweep_levels{0.1, 0.01, 0.001};
    std::vector<double> defect_ratios{1.0, 4.0, 16.0};
    std::vector<int> defect_windows{4, 8};
    DefectParams defect;
    double defect_slack_tol = 1e-10;
    double commutator_delta = 0.2;
    std::vector<double> commutator_deltas{0.4, 0.2, 0.1};
    double energy_tol = 1e-2;
    std::filesystem::path base_dir = ".";  ///< relative file paths resolve against this
};

namespace detail {

struct KeyInfo {
    const char* key;
    const char* fallback;
    const char* help;
};

inline const std::vector<KeyInfo>& config_keys() {
    static const std::vector<KeyInfo> keys = {
        {"grid.dim", "2", "spatial dimension, 1 to 3"},
        {"grid.n", "64", "cells per axis (one value or one per axis)"},
        {"grid.length", "6.283185307179586", "period per axis; all axes must share one cell width"},
        {"params.gamma", "2", "pressure exponent, > 1"},
        {"params.eps", "0.01", "density diffusion"},
        {"params.delta", "0.2", "mollification radius (0 disables mollification)"},
        {"params.eta", "0.01", "drag coefficient"},
        {"transport.cfl", "0.45", "advective CFL number in (0, 1]; positivity needs <= 0.5"},
        {"transport.order", "1", "1 = upwind, 2 = minmod-limited reconstruction"},
        {"transport.dt_max", "0.002", "largest time step"},
        {"stokes.rtol", "1e-8", "relative residual target of the Krylov solver"},
        {"stokes.max_iter", "500", "Krylov iteration cap"},
        {"run.t_end", "0.1", "final time"},
        {"run.slab", "0.05", "length of a Picard time slab"},
        {"run.fp_tol", "1e-7", "Picard stopping tolerance on |grad(v_{k+1} - v_k)| in L2(slab)"},
        {"run.fp_max_iter", "30", "Picard iteration cap"},
        {"run.output", "out", "output directory (overridden by --out)"},
        {"run.store_every", "10", "store a state and a diagnostics row every this many steps"},
        {"run.seed", "20240613", "seed of the audit sampling"},
        {"viscosity.kind", "diag", "diag | constant | varying"},
        {"viscosity.nu", "1", "diagonal viscosities (one value or one per axis)"},
        {"viscosity.entries", "", "constant tensor: dim^4 entries A_ijkl, row-major"},
        {"viscosity.lame", "", "constant tensor: mu,lambda for tau = 2 mu D + lambda div u Id"},
        {"viscosity.path", "", "varying tensor: coefficient file prefixes <p>_ijkl.asf, one per breakpoint"},
        {"viscosity.modulation", "0.1", "varying tensor without files: tau_ij = 2 sqrt(nu_i nu_j) D_ij scaled by 1 + m sin x1"},
        {"init.kind", "cosine", "constant | bump | cosine | oscillatory"},
        {"init.value", "1", "background density"},
        {"init.amplitude", "0.2", "bump height or cosine amplitude (relative)"},
        {"init.mode", "1", "cosine mode along x1"},
        {"init.width", "0.5", "bump width"},
        {"init.wavelength", "0.39269908169872414", "oscillation wavelength (2 pi / 16)"},
        {"init.osc_amplitude", "0.5", "relative oscillation amplitude"},
        {"init.base", "constant", "base profile of the oscillatory kind: constant | bump | cosine"},
        {"forcing.kind", "zero", "zero | cosine | file"},
        {"forcing.amplitude", "0", "cosine forcing amplitude"},
        {"forcing.mode", "1", "cosine forcing mode along x1"},
        {"forcing.path", "", "forcing snapshot files, one per time breakpoint"},
        {"sweep.deltas", "0.4,0.2,0.1,0.05", "mollification radii of sweep-delta"},
        {"sweep.levels", "0.1,0.01,0.001", "eps = eta levels of sweep-eps"},
        {"defect.ratios", "1,4,16", "anisotropy ratios of defect-study (last-axis viscosity factor)"},
        {"defect.windows", "4,8", "window sizes of defect-study"},
        {"defect.window", "8", "window reported in the diagnostics CSV"},
        {"defect.h_reg", "1e-8", "regularization h of the defect functional"},
        {"defect.slack_tol", "1e-10", "relative slack added to the defect right-hand side"},
        {"diagnostics.commutator_delta", "0.2", "radius of the commutator_l1 column (0 disables)"},
        {"diagnostics.commutator_deltas", "0.4,0.2,0.1", "radii of the commutator audit"},
        {"diagnostics.energy_tol", "1e-2", "relative tolerance of the energy audit"},
    };
    return keys;
}

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    if (trim(s).empty()) return out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

class ValueReader {
public:
    ValueReader(const std::map<std::string, std::pair<std::string, int>>& values) : values_(values) {}

    int line(const std::string& key) const {
        const auto it = values_.find(key);
        return it == values_.end() ? 0 : it->second.second;
    }

    std::string text(const std::string& key) const {
        const auto it = values_.find(key);
        if (it != values_.end()) return it->second.first;
        for (const auto& k : config_keys())
            if (key == k.key) return k.fallback;
        throw UnknownKey(0, key);
    }

    double real(const std::string& key) const { return parse_real(text(key), key); }

    long integer(const std::string& key) const {
        const auto s = text(key);
        long v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) fail(key, "expected an integer, got '" + s + "'");
        return v;
    }

    std::vector<double> reals(const std::string& key) const {
        std::vector<double> out;
        for (const auto& item : split_list(text(key))) out.push_back(parse_real(item, key));
        return out;
    }

    std::vector<int> integers(const std::string& key) const {
        std::vector<int> out;
        for (const auto& item : split_list(text(key))) {
            int v = 0;
            const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
            if (ec != std::errc() || ptr != item.data() + item.size()) fail(key, "expected integers, got '" + item + "'");
            out.push_back(v);
        }
        return out;
    }

    [[noreturn]] void fail(const std::string& key, const std::string& reason) const {
        throw ParseError(line(key), key + ": " + reason);
    }

private:
    double parse_real(const std::string& s, const std::string& key) const {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
            fail(key, "expected a finite number, got '" + s + "'");
        return v;
    }

    const std::map<std::string, std::pair<std::string, int>>& values_;
};

}  // namespace detail

/// Help text listing every configuration key with its default.
inline std::string config_help() {
    std::ostringstream os;
    os << "Configuration keys (key = value, '#' starts a comment):\n";
    for (const auto& k : detail::config_keys()) {
        std::string fallback = k.fallback;
        if (fallback.empty()) fallback = "(unset)";
        os << "  " << k.key << " = " << fallback << "\n      " << k.help << "\n";
    }
    return os.str();
}

/// Parses `key = value` lines. Unknown keys and malformed or inadmissible values are errors.
inline RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir = ".") {
    std::map<std::string, std::pair<std::string, int>> values;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const auto line = detail::trim(raw);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(line_no, "expected 'key = value'");
        const auto key = detail::trim(std::string_view(line).substr(0, eq));
        const auto value = detail::trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw ParseError(line_no, "missing key");
        bool known = false;
        for (const auto& k : detail::config_keys()) known = known || key == k.key;
        if (!known) throw UnknownKey(line_no, key);
        if (values.count(key)) throw ParseError(line_no, "duplicate key '" + key + "'");
        values[key] = {value, line_no};
    }

    const detail::ValueReader r(values);
    RunConfig cfg;
    cfg.base_dir = base_dir;

    const long dim = r.integer("grid.dim");
    if (dim < 1 || dim > 3) r.fail("grid.dim", "must be 1, 2 or 3");
    auto ns = r.integers("grid.n");
    auto lens = r.reals("grid.length");
    if (ns.size() == 1) ns.assign(dim, ns[0]);
    if (lens.size() == 1) lens.assign(dim, lens[0]);
    if (static_cast<long>(ns.size()) != dim) r.fail("grid.n", "needs one value or one per axis");
    if (static_cast<long>(lens.size()) != dim) r.fail("grid.length", "needs one value or one per axis");
    cfg.grid.dim = static_cast<int>(dim);
    for (int a = 0; a < 3; ++a) {
        cfg.grid.n[a] = a < dim ? ns[a] : 1;
        cfg.grid.length[a] = a < dim ? lens[a] : two_pi;
    }
    try {
        cfg.grid.validate();
    } catch (const Error& e) {
        r.fail("grid.n", e.what());
    }

    auto& p = cfg.params;
    p.gamma = r.real("params.gamma");
    if (!(p.gamma > 1.0)) r.fail("params.gamma", "must be > 1");
    p.eps = r.real("params.eps");
    if (p.eps < 0.0) r.fail("params.eps", "must be >= 0");
    p.delta = r.real("params.delta");
    if (p.delta < 0.0) r.fail("params.delta", "must be >= 0");
    p.eta = r.real("params.eta");
    if (p.eta < 0.0) r.fail("params.eta", "must be >= 0");
    p.cfl = r.real("transport.cfl");
    if (!(p.cfl > 0.0 && p.cfl <= 1.0)) r.fail("transport.cfl", "must lie in (0, 1]");
    if (p.cfl > 0.5) log::warn("transport.cfl above 0.5 voids the positivity guarantee");
    p.order = static_cast<int>(r.integer("transport.order"));
    if (p.order != 1 && p.order != 2) r.fail("transport.order", "must be 1 or 2");
    p.dt_max = r.real("transport.dt_max");
    if (!(p.dt_max > 0.0)) r.fail("transport.dt_max", "must be positive");
    p.stokes.rtol = r.real("stokes.rtol");
    if (!(p.stokes.rtol > 0.0)) r.fail("stokes.rtol", "must be positive");
    p.stokes.max_iter = static_cast<int>(r.integer("stokes.max_iter"));
    if (p.stokes.max_iter < 1) r.fail("stokes.max_iter", "must be >= 1");
    p.fp_tol = r.real("run.fp_tol");
    if (!(p.fp_tol > 0.0)) r.fail("run.fp_tol", "must be positive");
    p.fp_max_iter = static_cast<int>(r.integer("run.fp_max_iter"));
    if (p.fp_max_iter < 1) r.fail("run.fp_max_iter", "must be >= 1");

    cfg.t_end = r.real("run.t_end");
    if (cfg.t_end < 0.0) r.fail("run.t_end", "must be >= 0");
    cfg.slab = r.real("run.slab");
    if (!(cfg.slab > 0.0)) r.fail("run.slab", "must be positive");
    cfg.output = r.text("run.output");
    cfg.store_every = static_cast<int>(r.integer("run.store_every"));
    if (cfg.store_every < 1) r.fail("run.store_every", "must be >= 1");
    const long seed = r.integer("run.seed");
    if (seed < 0) r.fail("run.seed", "must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(seed);

    auto& v = cfg.viscosity;
    v.kind = r.text("viscosity.kind");
    if (v.kind != "diag" && v.kind != "constant" && v.kind != "varying")
        r.fail("viscosity.kind", "must be diag, constant or varying");
    v.nu = r.reals("viscosity.nu");
    if (v.nu.size() == 1) v.nu.assign(dim, v.nu[0]);
    if (static_cast<long>(v.nu.size()) != dim) r.fail("viscosity.nu", "needs one value or one per axis");
    for (double x : v.nu)
        if (!(x > 0.0)) r.fail("viscosity.nu", "entries must be positive");
    v.entries = r.reals("viscosity.entries");
    if (!v.entries.empty() && static_cast<long>(v.entries.size()) != dim * dim * dim * dim)
        r.fail("viscosity.entries", "needs dim^4 values");
    v.lame = r.reals("viscosity.lame");
    if (!v.lame.empty() && v.lame.size() != 2) r.fail("viscosity.lame", "needs mu,lambda");
    v.paths = detail::split_list(r.text("viscosity.path"));
    v.modulation = r.real("viscosity.modulation");
    if (v.kind == "varying" && !(std::abs(v.modulation) < 1.0)) r.fail("viscosity.modulation", "must satisfy |m| < 1");

    auto& ini = cfg.init;
    ini.kind = r.text("init.kind");
    auto profile_ok = [](const std::string& k) { return k == "constant" || k == "bump" || k == "cosine"; };
    if (!profile_ok(ini.kind) && ini.kind != "oscillatory")
        r.fail("init.kind", "must be constant, bump, cosine or oscillatory");
    ini.value = r.real("init.value");
    if (ini.value < 0.0) r.fail("init.value", "must be >= 0");
    ini.amplitude = r.real("init.amplitude");
    ini.mode = static_cast<int>(r.integer("init.mode"));
    ini.width = r.real("init.width");
    if (!(ini.width > 0.0)) r.fail("init.width", "must be positive");
    ini.wavelength = r.real("init.wavelength");
    if (!(ini.wavelength > 0.0)) r.fail("init.wavelength", "must be positive");
    if (ini.kind == "oscillatory" && ini.wavelength < 4.0 * cfg.grid.h()) {
        std::ostringstream msg;
        msg << "wavelength " << ini.wavelength << " is resolved by fewer than 4 cells (h = " << cfg.grid.h() << ")";
        throw UnresolvedWavelength(msg.str());
    }
    ini.osc_amplitude = r.real("init.osc_amplitude");
    ini.base = r.text("init.base");
    if (!profile_ok(ini.base)) r.fail("init.base", "must be constant, bump or cosine");

    auto& f = cfg.forcing;
    f.kind = r.text("forcing.kind");
    if (f.kind != "zero" && f.kind != "cosine" && f.kind != "file") r.fail("forcing.kind", "must be zero, cosine or file");
    f.amplitude = r.real("forcing.amplitude");
    f.mode = static_cast<int>(r.integer("forcing.mode"));
    f.paths = detail::split_list(r.text("forcing.path"));
    if (f.kind == "file" && f.paths.empty()) r.fail("forcing.path", "file forcing needs at least one path");

    cfg.sweep_deltas = r.reals("sweep.deltas");
    for (double d : cfg.sweep_deltas)
        if (d < 0.0) r.fail("sweep.deltas", "radii must be >= 0");
    cfg.sweep_levels = r.reals("sweep.levels");
    for (double l : cfg.sweep_levels)
        if (l < 0.0) r.fail("sweep.levels", "levels must be >= 0");
    cfg.defect_ratios = r.reals("defect.ratios");
    for (double x : cfg.defect_ratios)
        if (!(x > 0.0)) r.fail("defect.ratios", "ratios must be positive");
    cfg.defect_windows = r.integers("defect.windows");
    cfg.defect.window = static_cast<int>(r.integer("defect.window"));
    cfg.defect.h_reg = r.real("defect.h_reg");
    if (cfg.defect.h_reg < 0.0) r.fail("defect.h_reg", "must be >= 0");
    cfg.defect_slack_tol = r.real("defect.slack_tol");
    if (cfg.defect_slack_tol < 0.0) r.fail("defect.slack_tol", "must be >= 0");
    auto window_ok = [&](int w) {
        if (w < 2) return false;
        for (int a = 0; a < cfg.grid.dim; ++a)
            if (cfg.grid.n[a] % w != 0) return false;
        return true;
    };
    if (!window_ok(cfg.defect.window)) r.fail("defect.window", "must be >= 2 cells and divide every axis");
    for (int w : cfg.defect_windows)
        if (!window_ok(w)) r.fail("defect.windows", "windows must be >= 2 cells and divide every axis");
    cfg.commutator_delta = r.real("diagnostics.commutator_delta");
    if (cfg.commutator_delta < 0.0) r.fail("diagnostics.commutator_delta", "must be >= 0");
    cfg.commutator_deltas = r.reals("diagnostics.commutator_deltas");
    cfg.energy_tol = r.real("diagnostics.energy_tol");
    if (cfg.energy_tol < 0.0) r.fail("diagnostics.energy_tol", "must be >= 0");
    return cfg;
}

inline RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    auto dir = path.parent_path();
    if (dir.empty()) dir = ".";
    return parse_config_text(ss.str(), dir);
}

namespace detail {

inline std::filesystem::path resolve(const RunConfig& cfg, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : cfg.base_dir / path;
}

inline ScalarField base_profile(const std::string& kind, const InitialSpec& s, const GridSpec& g) {
    if (kind == "constant") return ScalarField(g, s.value);
    if (kind == "cosine")
        return ScalarField::sample(g, [&](double x, double, double) { return s.value * (1.0 + s.amplitude * std::cos(s.mode * x)); });
    // bump centred in the box, periodic distance
    return ScalarField::sample(g, [&](double x, double y, double z) {
        const double c[3] = {x, y, z};
        double r2 = 0.0;
        for (int a = 0; a < g.dim; ++a) {
            double d = std::abs(c[a] - 0.5 * g.length[a]);
            d = std::min(d, g.length[a] - d);
            r2 += d * d;
        }
        return s.value + s.amplitude * std::exp(-r2 / (2.0 * s.width * s.width));
    });
}

}  // namespace detail

/// Initial density; negative samples are clipped to zero and counted in the log.
inline ScalarField make_initial(const InitialSpec& spec, const GridSpec& grid) {
    ScalarField rho;
    if (spec.kind == "oscillatory") {
        if (spec.wavelength < 4.0 * grid.h()) throw UnresolvedWavelength("oscillation wavelength below 4 cells");
        rho = detail::base_profile(spec.base, spec, grid);
        const auto osc = ScalarField::sample(grid, [&](double x, double, double) {
            return 1.0 + spec.osc_amplitude * std::sin(two_pi * x / spec.wavelength);
        });
        rho = hadamard(rho, osc);
    } else {
        rho = detail::base_profile(spec.kind, spec, grid);
    }
    std::size_t clipped = 0;
    for (double& r : rho.raw())
        if (r < 0.0) {
            r = 0.0;
            ++clipped;
        }
    if (clipped > 0) log::info("initial density: clipped " + std::to_string(clipped) + " negative samples to zero");
    return rho;
}

/// Viscosity tensor of the configuration, with the last-axis viscosity multiplied by `ratio`.
inline ViscosityTensor make_viscosity(const RunConfig& cfg, double ratio = 1.0) {
    const auto& v = cfg.viscosity;
    const int d = cfg.grid.dim;
    auto nu = v.nu;
    nu.back() *= ratio;
    if (v.kind == "diag") return ViscosityTensor::diag(nu);
    if (v.kind == "constant") {
        if (!v.entries.empty()) {
            Rank4 a(d);
            a.a = v.entries;
            return ViscosityTensor::constant(std::move(a));
        }
        if (v.lame.size() == 2) return ViscosityTensor::isotropic(d, v.lame[0], v.lame[1]);
        return ViscosityTensor::constant(ViscosityTensor::diag(nu).constant_tensor());
    }
    if (v.paths.empty()) {
        // tau_ij = 2 sqrt(nu_i nu_j) D_ij, pointwise coercive with constant 2 min nu
        Rank4 base(d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                const double w = std::sqrt(nu[i] * nu[j]);
                base(i, j, i, j) += w;
                base(i, j, j, i) += w;
            }
        const double m = v.modulation;
        return ViscosityTensor::varying_from(cfg.grid, [&](double x, double, double) {
            Rank4 cell = base;
            for (double& e : cell.a) e *= 1.0 + m * std::sin(x);
            return cell;
        });
    }
    std::vector<ViscosityTensor::Breakpoint> bps;
    const std::size_t per = static_cast<std::size_t>(d * d * d * d);
    for (const auto& prefix : v.paths) {
        ViscosityTensor::Breakpoint bp;
        bp.coeffs.assign(cfg.grid.size() * per, 0.0);
        bool have_time = false;
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j)
                for (int k = 0; k < d; ++k)
                    for (int l = k; l < d; ++l) {
                        std::ostringstream name;
                        name << prefix << '_' << i + 1 << j + 1 << k + 1 << l + 1 << ".asf";
                        const auto snap = read_snapshot(detail::resolve(cfg, name.str()), cfg.grid.length[0]);
                        require_same_grid(snap.field.grid(), cfg.grid);
                        if (!have_time) {
                            bp.time = snap.t;
                            have_time = true;
                        } else if (snap.t != bp.time) {
                            throw IoError(name.str() + ": breakpoint time differs from the other files of " + prefix);
                        }
                        const int is[2] = {i, j}, ks[2] = {k, l};
                        for (int a = 0; a < 2; ++a)
                            for (int b = 0; b < 2; ++b) {
                                const std::size_t e = Rank4::index(d, is[a], is[1 - a], ks[b], ks[1 - b]);
                                for (std::size_t c = 0; c < cfg.grid.size(); ++c) bp.coeffs[c * per + e] = snap.field[c];
                            }
                    }
        bps.push_back(std::move(bp));
    }
    return ViscosityTensor::varying(cfg.grid, std::move(bps));
}

inline Forcing make_forcing(const RunConfig& cfg) {
    const auto& f = cfg.forcing;
    if (f.kind == "zero") return Forcing::zero();
    if (f.kind == "cosine")
        return Forcing::steady(ScalarField::sample(cfg.grid, [&](double x, double, double) { return f.amplitude * std::cos(f.mode * x); }));
    std::vector<std::pair<double, ScalarField>> bps;
    for (const auto& p : f.paths) {
        auto snap = read_snapshot(detail::resolve(cfg, p), cfg.grid.length[0]);
        require_same_grid(snap.field.grid(), cfg.grid);
        bps.emplace_back(snap.t, std::move(snap.field));
    }
    return Forcing::breakpoints(std::move(bps));
}

inline CoupledProblem make_problem(const RunConfig& cfg, double ratio = 1.0) {
    cfg.params.validate();
    return CoupledProblem{make_viscosity(cfg, ratio), make_forcing(cfg), cfg.params};
}

inline RecorderOptions recorder_options(const RunConfig& cfg) {
    RecorderOptions o;
    o.store_every = cfg.store_every;
    o.commutator_delta = cfg.commutator_delta;
    o.defect = cfg.defect;
    o.extra_windows = cfg.defect_windows;
    return o;
}

}  // namespace aniso_stokes
