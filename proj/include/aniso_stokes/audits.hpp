#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "aniso_stokes/coupled.hpp"
#include "aniso_stokes/errors.hpp"
#include "aniso_stokes/mollifier.hpp"

namespace aniso_stokes {

struct MassAudit {
    double max_relative_error = 0.0;
    bool passed = false;
};

/// |mass + drag removals - initial mass| / initial mass, worst over stored times.
inline MassAudit mass_audit(const Trajectory& traj, double tol = 1e-10) {
    MassAudit out;
    const double m0 = traj.initial_mass;
    for (const auto& l : traj.ledgers) {
        const double err = std::abs(l.balance() - m0) / std::max(m0, 1e-300);
        out.max_relative_error = std::max(out.max_relative_error, err);
    }
    out.passed = out.max_relative_error <= tol;
    return out;
}

struct EnergyAudit {
    std::vector<double> slack;
    double initial_energy = 0.0;
    double min_slack = 0.0;
    bool passed = false;

    /// Magnitude of the most negative slack, 0 when the slack never goes negative.
    double negative_part() const { return std::max(-min_slack, 0.0); }
};

/// Slack of the energy inequality at every stored time; passes when slack >= -tol E_0.
inline EnergyAudit energy_audit(const Trajectory& traj, double tol = 1e-2) {
    EnergyAudit out;
    out.initial_energy = traj.initial_energy;
    out.min_slack = std::numeric_limits<double>::infinity();
    for (const auto& r : traj.rows) {
        out.slack.push_back(r.energy_slack);
        out.min_slack = std::min(out.min_slack, r.energy_slack);
    }
    if (out.slack.empty()) out.min_slack = 0.0;
    out.passed = out.min_slack >= -tol * traj.initial_energy;
    return out;
}

struct PressureAudit {
    double l2 = 0.0;        ///< || rho^gamma ||_{L^2((0,T) x torus)}
    double constant = 0.0;  ///< l2 / int rho_0^gamma
    bool finite = false;
};

inline PressureAudit pressure_l2_audit(const Trajectory& traj) {
    PressureAudit out;
    out.l2 = std::sqrt(traj.pgamma_sq_cum);
    out.constant = traj.initial_energy > 0.0 ? out.l2 / traj.initial_energy : 0.0;
    out.finite = std::isfinite(out.l2);
    return out;
}

struct DefectAudit {
    int window = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    double initial = 0.0;
    bool passed = false;
};

/// lhs = int_0^T D_L(rho) dt;
/// rhs = T D_L(rho_0) + h^{1/gamma} int int |div w| + slack_tol T |torus|.
inline DefectAudit defect_inequality_audit(const Trajectory& traj, int window, double slack_tol = 1e-10) {
    const auto it = std::find_if(traj.defects.begin(), traj.defects.end(),
                                 [window](const DefectTrack& d) { return d.window == window; });
    if (it == traj.defects.end()) throw WindowMismatch("trajectory did not track the requested defect window");
    const double T = traj.t_end();
    DefectAudit out;
    out.window = window;
    out.initial = it->initial;
    out.lhs = it->integral;
    out.rhs = T * it->initial + std::pow(traj.h_reg, 1.0 / traj.gamma) * traj.abs_div_cum +
              slack_tol * T * traj.grid.volume();
    out.passed = out.lhs <= out.rhs;
    return out;
}

struct CommutatorTable {
    std::vector<double> deltas;
    std::vector<double> times;
    std::vector<std::vector<double>> values;  ///< values[state][delta]
    bool monotone = false;
};

/// Commutator residual of every stored state at each radius; monotone when the residual never
/// grows by more than 5% from one radius to the next smaller one.
inline CommutatorTable commutator_audit(const Trajectory& traj, std::vector<double> deltas) {
    if (traj.densities.size() != traj.times.size())
        throw Error("commutator audit needs a trajectory with stored fields");
    std::sort(deltas.begin(), deltas.end(), std::greater<>());
    CommutatorTable out;
    out.deltas = deltas;
    out.times = traj.times;
    out.monotone = true;
    for (std::size_t s = 0; s < traj.densities.size(); ++s) {
        std::vector<double> row;
        for (double d : deltas) row.push_back(commutator_residual(traj.densities[s], traj.velocities[s], d));
        for (std::size_t j = 1; j < row.size(); ++j)
            if (row[j] > 1.05 * row[j - 1] + 1e-13) out.monotone = false;
        out.values.push_back(std::move(row));
    }
    return out;
}

}  // namespace aniso_stokes
