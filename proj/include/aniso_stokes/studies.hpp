#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "aniso_stokes/audits.hpp"
#include "aniso_stokes/config.hpp"
#include "aniso_stokes/coupled.hpp"
#include "aniso_stokes/diagnostics.hpp"
#include "aniso_stokes/snapshot.hpp"

namespace aniso_stokes {

struct RunOutcome {
    Trajectory trajectory;
    MassAudit mass;
    EnergyAudit energy;
    PressureAudit pressure;
    std::vector<DefectAudit> defects;
    bool positivity = false;
    bool max_principle_checked = false;  ///< only meaningful without drag
    bool max_principle = false;
    bool l2_bound = false;
    bool passed = false;
    std::string summary;
};

/// Per-trajectory invariants of one run inside a study.
struct RunCheck {
    std::string label;
    double mass_error = 0.0;    ///< worst relative mass-ledger error
    double min_density = 0.0;
    double min_energy_slack = 0.0;
    double initial_energy = 0.0;
};

namespace detail {

inline RunCheck check_of(std::string label, const Trajectory& traj) {
    return RunCheck{std::move(label), mass_audit(traj).max_relative_error, traj.audit.min_density,
                    energy_audit(traj).min_slack, traj.initial_energy};
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

inline std::string numbered(const std::string& stem, std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "_%06zu.asf", index);
    return stem + buf;
}

inline RunOutcome audit_run(Trajectory traj, const RunConfig& cfg, const CoupledProblem& problem) {
    RunOutcome out;
    out.mass = mass_audit(traj);
    out.energy = energy_audit(traj, cfg.energy_tol);
    out.pressure = pressure_l2_audit(traj);
    for (const auto& tr : traj.defects)
        out.defects.push_back(defect_inequality_audit(traj, tr.window, cfg.defect_slack_tol));
    out.positivity = traj.audit.min_density >= 0.0;
    // the bound holds for the first-order scheme; rounding is allowed for
    const double round = 1e-12;
    out.max_principle_checked = problem.params.eta == 0.0 && problem.params.order == 1;
    out.max_principle = traj.audit.max_principle_ratio <= 1.0 + round;
    out.l2_bound = traj.audit.l2_ratio <= 1.0 + round;
    bool defects_ok = std::all_of(out.defects.begin(), out.defects.end(), [](const DefectAudit& d) { return d.passed; });
    out.passed = out.mass.passed && out.energy.passed && out.pressure.finite && out.positivity && defects_ok &&
                 (!out.max_principle_checked || (out.max_principle && out.l2_bound));

    std::ostringstream os;
    os.precision(6);
    os << "t_end " << traj.t_end() << ", steps " << traj.audit.steps << ", slabs " << traj.slabs.size() << '\n';
    os << "mass identity: max relative error " << out.mass.max_relative_error << (out.mass.passed ? "  ok" : "  FAIL") << '\n';
    os << "positivity: min density " << traj.audit.min_density << (out.positivity ? "  ok" : "  FAIL") << '\n';
    if (out.max_principle_checked) {
        os << "maximum principle: worst ratio " << traj.audit.max_principle_ratio << (out.max_principle ? "  ok" : "  FAIL") << '\n';
        os << "L2 bound: worst ratio " << traj.audit.l2_ratio << (out.l2_bound ? "  ok" : "  FAIL") << '\n';
    }
    os << "energy: min slack " << out.energy.min_slack << " (E0 " << out.energy.initial_energy << ")"
       << (out.energy.passed ? "  ok" : "  FAIL") << '\n';
    os << "pressure L2: " << out.pressure.l2 << " (constant " << out.pressure.constant << ")" << '\n';
    for (const auto& d : out.defects)
        os << "defect window " << d.window << ": lhs " << d.lhs << " rhs " << d.rhs << (d.passed ? "  ok" : "  FAIL") << '\n';
    for (const auto& s : traj.slabs) {
        os << "slab [" << s.t0 << ", " << s.t1 << "] steps " << s.steps << " iterations " << s.iterations;
        if (!s.history.empty()) os << " terminal factor " << terminal_factor(s.history);
        os << '\n';
    }
    out.summary = os.str();
    out.trajectory = std::move(traj);
    return out;
}

}  // namespace detail

/// Single trajectory: diagnostics.csv, density and velocity snapshots of the stored states, summary.txt.
inline RunOutcome run(const RunConfig& cfg, const std::filesystem::path& out_dir, bool write_snapshots = true) {
    const auto problem = make_problem(cfg);
    const auto rho0 = make_initial(cfg.init, cfg.grid);
    auto options = recorder_options(cfg);
    options.store_fields = write_snapshots;
    auto traj = march(rho0, problem, cfg.t_end, cfg.slab, options);
    auto out = detail::audit_run(std::move(traj), cfg, problem);

    std::filesystem::create_directories(out_dir);
    write_csv(out_dir / "diagnostics.csv", out.trajectory.rows);
    if (write_snapshots) {
        const auto& tr = out.trajectory;
        for (std::size_t s = 0; s < tr.densities.size(); ++s) {
            write_snapshot(out_dir / detail::numbered("rho", s), tr.densities[s], tr.times[s]);
            for (int a = 0; a < tr.velocities[s].dim(); ++a)
                write_snapshot(out_dir / detail::numbered("u" + std::to_string(a + 1), s), tr.velocities[s][a], tr.times[s]);
        }
    }
    detail::write_text(out_dir / "summary.txt", out.summary);
    return out;
}

struct DeltaSweepRow {
    double delta = 0.0;
    double gap_to_next = 0.0;  ///< L2 distance of the final densities of this and the next level
    double ratio = 0.0;        ///< gap_to_next / previous gap
};

struct DeltaSweep {
    std::vector<DeltaSweepRow> rows;
    double finest_to_direct = 0.0;
    std::vector<RunCheck> checks;
    bool ratios_ok = false;
    bool direct_ok = false;
    bool passed() const { return ratios_ok && direct_ok; }
};

/// Runs the mollified system for every radius (largest first) and the unmollified stepper,
/// comparing final densities in L2.
inline DeltaSweep sweep_delta(const RunConfig& cfg, std::vector<double> deltas, const std::filesystem::path& out_dir,
                              double max_ratio = 0.7) {
    if (deltas.size() < 2) throw Error("sweep-delta needs at least two radii");
    std::sort(deltas.begin(), deltas.end(), std::greater<>());
    const auto rho0 = make_initial(cfg.init, cfg.grid);
    auto options = recorder_options(cfg);
    options.store_fields = false;
    DeltaSweep out;
    std::vector<ScalarField> finals;
    for (double d : deltas) {
        RunConfig c = cfg;
        c.params.delta = d;
        const auto problem = make_problem(c);
        const auto traj = march(rho0, problem, c.t_end, c.slab, options);
        out.checks.push_back(detail::check_of("delta " + detail::fmt(d), traj));
        finals.push_back(traj.final_density);
    }
    RunConfig c0 = cfg;
    c0.params.delta = 0.0;
    const auto direct_traj = direct_march(rho0, make_problem(c0), c0.t_end, options);
    out.checks.push_back(detail::check_of("unmollified", direct_traj));
    const auto& direct = direct_traj.final_density;

    out.ratios_ok = true;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        DeltaSweepRow row;
        row.delta = deltas[i];
        if (i + 1 < deltas.size()) {
            row.gap_to_next = (finals[i] - finals[i + 1]).l2_norm();
            if (i > 0) {
                const double prev = out.rows.back().gap_to_next;
                row.ratio = prev > 0.0 ? row.gap_to_next / prev : 0.0;
                out.ratios_ok = out.ratios_ok && row.ratio <= max_ratio;
            }
        }
        out.rows.push_back(row);
    }
    out.finest_to_direct = (finals.back() - direct).l2_norm();
    const double last_gap = out.rows[out.rows.size() - 2].gap_to_next;
    out.direct_ok = out.finest_to_direct <= 2.0 * last_gap;

    std::filesystem::create_directories(out_dir);
    std::ostringstream os;
    os << "delta,l2_gap_to_next,gap_ratio,l2_to_direct\n";
    for (std::size_t i = 0; i < out.rows.size(); ++i) {
        const auto& r = out.rows[i];
        os << detail::fmt(r.delta) << ',' << detail::fmt(r.gap_to_next) << ',' << detail::fmt(r.ratio) << ','
           << (i + 1 == out.rows.size() ? detail::fmt(out.finest_to_direct) : std::string("")) << '\n';
    }
    detail::write_text(out_dir / "sweep_delta.csv", os.str());
    return out;
}

struct EpsSweepRow {
    double level = 0.0;
    double mass_error = 0.0;
    double min_energy_slack = 0.0;
    double initial_energy = 0.0;
    double pgamma_l2 = 0.0;
    double pressure_constant = 0.0;
};

struct EpsSweep {
    std::vector<EpsSweepRow> rows;
    double spread = 0.0;  ///< max / min of the pressure L2 norms
    std::vector<RunCheck> checks;
    bool passed(double factor = 2.0) const {
        for (const auto& r : rows)
            if (!std::isfinite(r.pgamma_l2)) return false;
        return spread <= factor;
    }
};

/// Runs the system with eps = eta = level for every level and tabulates the ledgers.
inline EpsSweep sweep_eps_eta(const RunConfig& cfg, const std::vector<double>& levels, const std::filesystem::path& out_dir) {
    if (levels.empty()) throw Error("sweep-eps needs at least one level");
    const auto rho0 = make_initial(cfg.init, cfg.grid);
    auto options = recorder_options(cfg);
    options.store_fields = false;
    EpsSweep out;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double level : levels) {
        RunConfig c = cfg;
        c.params.eps = level;
        c.params.eta = level;
        const auto traj = march(rho0, make_problem(c), c.t_end, c.slab, options);
        out.checks.push_back(detail::check_of("eps = eta = " + detail::fmt(level), traj));
        EpsSweepRow row;
        row.level = level;
        row.mass_error = mass_audit(traj).max_relative_error;
        const auto e = energy_audit(traj, cfg.energy_tol);
        row.min_energy_slack = e.min_slack;
        row.initial_energy = e.initial_energy;
        const auto p = pressure_l2_audit(traj);
        row.pgamma_l2 = p.l2;
        row.pressure_constant = p.constant;
        lo = std::min(lo, p.l2);
        hi = std::max(hi, p.l2);
        out.rows.push_back(row);
    }
    out.spread = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();

    std::filesystem::create_directories(out_dir);
    std::ostringstream os;
    os << "level,mass_error,min_energy_slack,initial_energy,pgamma_l2,pressure_constant\n";
    for (const auto& r : out.rows)
        os << detail::fmt(r.level) << ',' << detail::fmt(r.mass_error) << ',' << detail::fmt(r.min_energy_slack) << ','
           << detail::fmt(r.initial_energy) << ',' << detail::fmt(r.pgamma_l2) << ',' << detail::fmt(r.pressure_constant)
           << '\n';
    detail::write_text(out_dir / "sweep_eps.csv", os.str());
    return out;
}

struct DefectStudyRow {
    double ratio = 1.0;
    DefectAudit audit;
};

struct DefectStudy {
    std::vector<DefectStudyRow> rows;
    std::vector<RunCheck> checks;
    bool passed() const {
        return std::all_of(rows.begin(), rows.end(), [](const DefectStudyRow& r) { return r.audit.passed; });
    }
};

/// Defect inequality audit for every anisotropy ratio (last-axis viscosity factor) and window.
inline DefectStudy defect_study(const RunConfig& cfg, const std::vector<double>& ratios, const std::vector<int>& windows,
                                const std::filesystem::path& out_dir) {
    if (ratios.empty() || windows.empty()) throw Error("defect-study needs ratios and windows");
    const auto rho0 = make_initial(cfg.init, cfg.grid);
    auto options = recorder_options(cfg);
    options.store_fields = false;
    options.extra_windows = windows;
    DefectStudy out;
    std::filesystem::create_directories(out_dir);
    for (double ratio : ratios) {
        const auto problem = make_problem(cfg, ratio);
        const auto traj = march(rho0, problem, cfg.t_end, cfg.slab, options);
        out.checks.push_back(detail::check_of("ratio " + detail::fmt(ratio), traj));
        write_csv(out_dir / ("diagnostics_ratio_" + detail::fmt(ratio) + ".csv"), traj.rows);
        for (int w : windows) out.rows.push_back({ratio, defect_inequality_audit(traj, w, cfg.defect_slack_tol)});
    }
    std::ostringstream os;
    os << "ratio,window,lhs,rhs,initial_defect,passed\n";
    for (const auto& r : out.rows)
        os << detail::fmt(r.ratio) << ',' << r.audit.window << ',' << detail::fmt(r.audit.lhs) << ','
           << detail::fmt(r.audit.rhs) << ',' << detail::fmt(r.audit.initial) << ',' << (r.audit.passed ? 1 : 0) << '\n';
    detail::write_text(out_dir / "defect_study.csv", os.str());
    return out;
}

}  // namespace aniso_stokes
