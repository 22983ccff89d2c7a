#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "aniso_stokes/diagnostics.hpp"
#include "aniso_stokes/errors.hpp"
#include "aniso_stokes/log.hpp"
#include "aniso_stokes/mollifier.hpp"
#include "aniso_stokes/spectral.hpp"
#include "aniso_stokes/stokes.hpp"
#include "aniso_stokes/transport.hpp"
#include "aniso_stokes/viscosity.hpp"

namespace aniso_stokes {

/// Forcing potential f(t, x), piecewise linear in time between breakpoints.
class Forcing {
public:
    Forcing() = default;
    static Forcing zero() { return Forcing(); }
    static Forcing steady(ScalarField f) { return breakpoints({{0.0, std::move(f)}}); }
    static Forcing breakpoints(std::vector<std::pair<double, ScalarField>> bps) {
        std::sort(bps.begin(), bps.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t i = 1; i < bps.size(); ++i) require_same_grid(bps[0].second.grid(), bps[i].second.grid());
        Forcing f;
        f.bps_ = std::move(bps);
        return f;
    }

    bool is_zero() const { return bps_.empty(); }

    ScalarField at(double t, const GridSpec& grid) const {
        if (bps_.empty()) return ScalarField(grid);
        require_same_grid(bps_.front().second.grid(), grid);
        if (bps_.size() == 1 || t <= bps_.front().first) return bps_.front().second;
        if (t >= bps_.back().first) return bps_.back().second;
        std::size_t m = 1;
        while (bps_[m].first < t) ++m;
        const double w = (t - bps_[m - 1].first) / (bps_[m].first - bps_[m - 1].first);
        return (1.0 - w) * bps_[m - 1].second + w * bps_[m].second;
    }

private:
    std::vector<std::pair<double, ScalarField>> bps_;
};

/// Everything that defines the regularized system apart from the initial density.
struct CoupledProblem {
    ViscosityTensor viscosity;
    Forcing forcing;
    SolverParams params;
};

struct Slab {
    double t0 = 0.0;
    double t1 = 0.0;
    int steps = 1;

    double dt() const { return (t1 - t0) / steps; }
    static Slab covering(double t0, double t1, double dt_max) {
        if (!(t1 > t0)) throw Error("slab needs t1 > t0");
        const int steps = std::max(1, static_cast<int>(std::ceil((t1 - t0) / dt_max - 1e-9)));
        return Slab{t0, t1, steps};
    }
};

/// Stokes operators keyed by time; rebuilt only when the tensor depends on time.
class OperatorCache {
public:
    OperatorCache(const CoupledProblem& problem, const GridSpec& grid) : problem_(problem), grid_(grid) {}

    const StokesOperator& at(double t) {
        if (!op_ || (problem_.viscosity.time_dependent() && op_->time() != t)) {
            const bool first = !op_;
            op_ = std::make_unique<StokesOperator>(
                StokesOperator::build(problem_.viscosity, grid_, t, problem_.params.stokes, first));
        }
        return *op_;
    }

private:
    const CoupledProblem& problem_;
    GridSpec grid_;
    std::unique_ptr<StokesOperator> op_;
};

/// u = solve(A, f - omega_delta * rho^gamma), the Stokes response to a density.
inline VectorField stokes_response(OperatorCache& ops, const CoupledProblem& problem, const MollifierKernel& kernel,
                                   const ScalarField& rho, double t) {
    const auto& op = ops.at(t);
    auto q = problem.forcing.at(t, rho.grid());
    q -= mollify(pressure_field(rho, problem.params.gamma), kernel);
    return op.solve(q);
}

/// Worst-case audit ratios over all steps; each stays <= 1 for a scheme obeying the bound.
struct StepAudit {
    int steps = 0;
    double min_density = 0.0;
    double max_principle_ratio = 0.0;  ///< max rho' / (max rho (1 + 1.1 dt |div w|_inf))
    double l2_ratio = 0.0;             ///< int rho'^2 / (int rho^2 (1 + 1.1 dt |div w|_inf))
    double dt_min = 0.0;
    double dt_max = 0.0;
};

struct DefectTrack {
    int window = 0;
    double initial = 0.0;  ///< D_L(rho_0)
    double integral = 0.0; ///< int_0^t D_L(rho) dt, trapezoid over steps
    double last = 0.0;
};

struct SlabRecord {
    double t0 = 0.0, t1 = 0.0;
    int steps = 0;
    int iterations = 0;
    std::vector<double> history;
};

/// Time-indexed solution together with its ledgers and running audit integrals.
struct Trajectory {
    std::vector<double> times;
    std::vector<ScalarField> densities;
    std::vector<VectorField> velocities;
    std::vector<MassLedger> ledgers;
    std::vector<DiagnosticsRow> rows;

    double initial_mass = 0.0;
    double initial_energy = 0.0;  ///< int rho_0^gamma
    double forcing_work_cum = 0.0;  ///< (gamma - 1) int int grad f . u
    double drag_energy_cum = 0.0;   ///< eta gamma int int (rho^{3 gamma - 1} + rho^{gamma + 2})
    double pgamma_sq_cum = 0.0;     ///< int int rho^{2 gamma}
    double abs_div_cum = 0.0;       ///< int int |div w| of the advecting velocity
    GridSpec grid;
    double gamma = 2.0;
    double h_reg = 0.0;
    StepAudit audit;
    std::vector<DefectTrack> defects;
    std::vector<SlabRecord> slabs;
    ScalarField final_density;

    double t_end() const { return times.empty() ? 0.0 : times.back(); }
};

struct RecorderOptions {
    int store_every = 1;
    bool store_fields = true;
    double commutator_delta = 0.2;  ///< radius of the commutator column; 0 disables it
    DefectParams defect;            ///< window reported in the diagnostics rows
    std::vector<int> extra_windows; ///< additional windows tracked for the defect audit
};

/// Accumulates running integrals at every step and stores states and rows at the storage cadence.
class Recorder {
public:
    Recorder(const CoupledProblem& problem, const ScalarField& rho0, double t0, RecorderOptions options = {})
        : problem_(problem), options_(std::move(options)), rho_(rho0), t_(t0), ledger_(MassLedger::start(rho0)) {
        if (options_.store_every < 1) throw Error("run.store_every must be >= 1");
        const double gamma = problem.params.gamma;
        traj_.grid = rho0.grid();
        traj_.gamma = gamma;
        traj_.h_reg = options_.defect.h_reg;
        traj_.initial_mass = ledger_.mass_now;
        traj_.initial_energy = pressure_field(rho0, gamma).integral();
        traj_.audit.min_density = rho0.min();
        pgamma_sq_last_ = power_integral(rho0, 2.0 * gamma);
        std::vector<int> windows{options_.defect.window};
        for (int w : options_.extra_windows)
            if (std::find(windows.begin(), windows.end(), w) == windows.end()) windows.push_back(w);
        for (int w : windows) {
            // extra windows that do not tile the grid are skipped; the reported one must tile it
            if (w != options_.defect.window && !window_fits(rho0.grid(), w)) continue;
            DefectTrack tr;
            tr.window = w;
            tr.initial = defect_proxy(rho0, gamma, DefectParams{w, options_.defect.h_reg});
            tr.last = tr.initial;
            traj_.defects.push_back(tr);
        }
    }

    const ScalarField& density() const { return rho_; }
    double time() const { return t_; }
    const MassLedger& ledger() const { return ledger_; }

    /// Called with the pair (rho_n, u_n) at the start of every step and once at the end.
    void observe(const VectorField& u, bool force = false) {
        if (!force && step_index_ % options_.store_every != 0) return;
        if (!traj_.times.empty() && traj_.times.back() == t_) return;
        traj_.times.push_back(t_);
        traj_.ledgers.push_back(ledger_);
        if (options_.store_fields) {
            traj_.densities.push_back(rho_);
            traj_.velocities.push_back(u);
        }
        traj_.rows.push_back(make_row(u));
    }

    /// Advances the recorded state by one step of size dt with Stokes velocity u and advecting velocity w.
    void step(const VectorField& u, const VectorField& w, double dt) {
        const auto& p = problem_.params;
        const double gamma = p.gamma;
        auto res = continuity_step(rho_, w, dt, p);
        const ScalarField& next = res.rho;

        // audits against the bounds of the exact flow
        const double divw = face_divergence(w).max_abs();
        const double grow = 1.0 + 1.1 * dt * divw;
        const double max_before = rho_.max();
        if (max_before > 0.0)
            traj_.audit.max_principle_ratio = std::max(traj_.audit.max_principle_ratio, next.max() / (max_before * grow));
        const double l2_before = inner(rho_, rho_);
        if (l2_before > 0.0)
            traj_.audit.l2_ratio = std::max(traj_.audit.l2_ratio, inner(next, next) / (l2_before * grow));
        traj_.audit.min_density = std::min(traj_.audit.min_density, next.min());
        traj_.audit.dt_min = traj_.audit.steps == 0 ? dt : std::min(traj_.audit.dt_min, dt);
        traj_.audit.dt_max = std::max(traj_.audit.dt_max, dt);
        ++traj_.audit.steps;

        // running integrals
        const double t = t_;
        dissipation_cum_ += (gamma - 1.0) * dt * viscous_work(problem_.viscosity, t, u).total;
        if (!problem_.forcing.is_zero()) {
            const auto f = problem_.forcing.at(t, rho_.grid());
            traj_.forcing_work_cum -= (gamma - 1.0) * dt * inner(f, spectral::div(u));
        }
        if (p.eta > 0.0)
            traj_.drag_energy_cum += p.eta * gamma * dt *
                                     (power_integral(next, 3.0 * gamma - 1.0) + power_integral(next, gamma + 2.0));
        const double sq_next = power_integral(next, 2.0 * gamma);
        traj_.pgamma_sq_cum += 0.5 * dt * (pgamma_sq_last_ + sq_next);
        pgamma_sq_last_ = sq_next;
        traj_.abs_div_cum += dt * spectral::div(w).lp_norm(1.0);
        for (auto& tr : traj_.defects) {
            const double now = defect_proxy(next, gamma, DefectParams{tr.window, options_.defect.h_reg});
            tr.integral += 0.5 * dt * (tr.last + now);
            tr.last = now;
        }

        ledger_.add(res.increment, next);
        rho_ = std::move(res.rho);
        t_ += dt;
        ++step_index_;
    }

    void add_slab(SlabRecord rec) { traj_.slabs.push_back(std::move(rec)); }

    Trajectory finish() && {
        traj_.final_density = rho_;
        return std::move(traj_);
    }
    const Trajectory& trajectory() const { return traj_; }

private:
    static bool window_fits(const GridSpec& g, int w) {
        if (w < 1) return false;
        for (int a = 0; a < g.dim; ++a)
            if (g.n[a] % w != 0) return false;
        return true;
    }

    static double power_integral(const ScalarField& rho, double p) {
        double s = 0.0;
        for (double r : rho.raw()) s += std::pow(r, p);
        return s * rho.grid().cell_volume();
    }

    DiagnosticsRow make_row(const VectorField& u) const {
        const double gamma = problem_.params.gamma;
        DiagnosticsRow r;
        r.t = t_;
        r.mass = ledger_.mass_now;
        r.drag2g_cum = ledger_.drag2g_cum;
        r.drag3_cum = ledger_.drag3_cum;
        r.pgamma_integral = power_integral(rho_, gamma);
        r.dissipation_cum = dissipation_cum_;
        r.grad_rho_gamma_half_cum = ledger_.grad_rho_gamma_half_cum;
        r.energy_slack = traj_.initial_energy + traj_.forcing_work_cum -
                         (r.pgamma_integral + r.dissipation_cum + traj_.drag_energy_cum + r.grad_rho_gamma_half_cum);
        r.rho_min = rho_.min();
        r.rho_max = rho_.max();
        r.pgamma_l2_running = std::sqrt(traj_.pgamma_sq_cum);
        r.defect_proxy = traj_.defects.empty() ? 0.0 : traj_.defects.front().last;
        r.commutator_l1 = options_.commutator_delta > 0.0 ? commutator_residual(rho_, u, options_.commutator_delta) : 0.0;
        return r;
    }

    const CoupledProblem& problem_;
    RecorderOptions options_;
    ScalarField rho_;
    double t_;
    MassLedger ledger_;
    Trajectory traj_;
    double dissipation_cum_ = 0.0;
    double pgamma_sq_last_ = 0.0;
    long step_index_ = 0;
};

/// L^2(slab) norm of the gradient of a piecewise-constant velocity history.
inline double slab_gradient_norm(const std::vector<VectorField>& w, double dt) {
    double s = 0.0;
    for (const auto& v : w) {
        const auto& fft = Fft::for_grid(v.grid());
        const auto& g = v.grid();
        const int last = g.dim - 1;
        const int nl = g.n[last];
        double acc = 0.0;
        for (const auto& comp : v) {
            const auto spec = fft.forward(comp);
            for (std::size_t i = 0; i < spec.size(); ++i) {
                const int m = fft.mode(last, i);
                const double weight = (m == 0 || (nl % 2 == 0 && m == nl / 2)) ? 1.0 : 2.0;
                acc += weight * fft.k2(i) * std::norm(spec[i]);
            }
        }
        s += dt * acc * g.cell_volume() / static_cast<double>(g.size());
    }
    return std::sqrt(s);
}

/// The fixed-point map: transports rho_0 through the slab with omega_delta * v and returns the
/// Stokes response at the start of every substep. The response at substep n uses the density
/// reached at the start of that substep.
inline std::vector<VectorField> apply_B(const std::vector<VectorField>& v, const ScalarField& rho0,
                                        const CoupledProblem& problem, const Slab& slab,
                                        OperatorCache* cache = nullptr) {
    if (static_cast<int>(v.size()) != slab.steps) throw DimensionMismatch("velocity history length differs from slab steps");
    if (rho0.min() < 0.0) throw NegativeInput("initial density must be nonnegative");
    std::optional<OperatorCache> local;
    if (cache == nullptr) cache = &local.emplace(problem, rho0.grid());
    const MollifierKernel kernel(problem.params.delta, rho0.grid());
    const double dt = slab.dt();
    std::vector<VectorField> out;
    out.reserve(v.size());
    ScalarField rho = rho0;
    for (int n = 0; n < slab.steps; ++n) {
        const double t = slab.t0 + n * dt;
        out.push_back(stokes_response(*cache, problem, kernel, rho, t));
        if (n + 1 < slab.steps) rho = continuity_step(rho, mollify(v[n], kernel), dt, problem.params).rho;
    }
    return out;
}

/// Last contraction ratio with a nonzero numerator; an exactly vanishing final increment
/// carries no rate information.
inline double terminal_factor(const std::vector<double>& history) {
    for (auto it = history.rbegin(); it != history.rend(); ++it)
        if (*it > 0.0) return *it;
    return 0.0;
}

struct PicardResult {
    std::vector<VectorField> velocity;  ///< last iterate, one sample per substep
    std::vector<double> history;        ///< successive contraction ratios
    std::vector<double> increments;     ///< |grad(v_{k+1} - v_k)| in L^2(slab)
    int iterations = 0;
    Slab slab;

    double terminal_factor() const { return aniso_stokes::terminal_factor(history); }
};

namespace detail {

/// Advective step bound cfl h / speed over all samples of a velocity history (infinite at rest).
inline double cfl_bound(const std::vector<VectorField>& v, const MollifierKernel& kernel, const SolverParams& p) {
    double speed = 0.0;
    for (const auto& s : v) speed = std::max(speed, advective_speed(mollify(s, kernel)));
    return speed > 0.0 ? p.cfl * kernel.grid().h() / speed : std::numeric_limits<double>::infinity();
}

/// Picard iteration on one slab; the substep count grows when an iterate violates the step bound.
inline PicardResult picard_iterate(const ScalarField& rho0, const CoupledProblem& problem, Slab slab,
                                   const std::vector<VectorField>* start, OperatorCache& cache) {
    const auto& p = problem.params;
    const MollifierKernel kernel(p.delta, rho0.grid());
    for (int attempt = 0; attempt < 8; ++attempt) {
        PicardResult res;
        res.slab = slab;
        std::vector<VectorField> v;
        if (start != nullptr && static_cast<int>(start->size()) == slab.steps)
            v = *start;
        else
            v.assign(slab.steps, VectorField(rho0.grid()));
        bool refined = false;
        int rising = 0;
        for (int k = 0; k < p.fp_max_iter; ++k) {
            const double bound = detail::cfl_bound(v, kernel, p);
            if (slab.dt() > 0.99 * bound) {
                const int steps = static_cast<int>(std::ceil((slab.t1 - slab.t0) / (0.9 * bound)));
                std::ostringstream msg;
                msg << "slab [" << slab.t0 << ", " << slab.t1 << "]: refining to " << steps << " substeps";
                log::info(msg.str());
                slab.steps = std::max(steps, slab.steps + 1);
                refined = true;
                break;
            }
            auto next = apply_B(v, rho0, problem, slab, &cache);
            std::vector<VectorField> diff;
            diff.reserve(next.size());
            for (std::size_t n = 0; n < next.size(); ++n) diff.push_back(next[n] - v[n]);
            const double inc = slab_gradient_norm(diff, slab.dt());
            if (!res.increments.empty()) {
                const double prev = res.increments.back();
                const double ratio = prev > 0.0 ? inc / prev : 0.0;
                res.history.push_back(ratio);
                rising = ratio >= 1.0 ? rising + 1 : 0;
            }
            res.increments.push_back(inc);
            res.iterations = k + 1;
            v = std::move(next);
            if (inc <= p.fp_tol) {
                res.velocity = std::move(v);
                return res;
            }
            if (rising >= 3) throw NoContraction("Picard increments grew for three consecutive iterations");
        }
        if (!refined) throw NoContraction("Picard iteration hit fp_max_iter without converging");
    }
    throw NoContraction("Picard iteration could not satisfy the step bound");
}

/// Regenerates the discrete solution along the converged slab: every substep solves Stokes from
/// the current density and transports with the mollified response.
inline void regenerate(Recorder& rec, const CoupledProblem& problem, const Slab& slab, OperatorCache& cache) {
    const MollifierKernel kernel(problem.params.delta, rec.density().grid());
    const double dt = slab.dt();
    for (int n = 0; n < slab.steps; ++n) {
        const double t = slab.t0 + n * dt;
        const auto u = stokes_response(cache, problem, kernel, rec.density(), t);
        rec.observe(u);
        const double step = n + 1 == slab.steps ? slab.t1 - rec.time() : dt;
        rec.step(u, mollify(u, kernel), step);
    }
}

inline void close(Recorder& rec, const CoupledProblem& problem, OperatorCache& cache) {
    const MollifierKernel kernel(problem.params.delta, rec.density().grid());
    rec.observe(stokes_response(cache, problem, kernel, rec.density(), rec.time()), true);
}

}  // namespace detail

/// Picard iteration v_{k+1} = B(v_k) on one slab from v_0 = 0 (or `start`), followed by
/// regeneration of the density along the converged velocity.
inline std::pair<Trajectory, PicardResult> picard_solve(const ScalarField& rho0, const CoupledProblem& problem,
                                                        const Slab& slab, RecorderOptions options = {},
                                                        const std::vector<VectorField>* start = nullptr) {
    problem.params.validate();
    if (rho0.min() < 0.0) throw NegativeInput("initial density must be nonnegative");
    OperatorCache cache(problem, rho0.grid());
    auto res = detail::picard_iterate(rho0, problem, slab, start, cache);
    Recorder rec(problem, rho0, slab.t0, std::move(options));
    detail::regenerate(rec, problem, res.slab, cache);
    detail::close(rec, problem, cache);
    rec.add_slab(SlabRecord{res.slab.t0, res.slab.t1, res.slab.steps, res.iterations, res.history});
    return {std::move(rec).finish(), std::move(res)};
}

/// Chains Picard slabs up to t_end, halving the slab length whenever the iteration fails to contract.
inline Trajectory march(const ScalarField& rho0, const CoupledProblem& problem, double t_end, double slab_len,
                        RecorderOptions options = {}) {
    problem.params.validate();
    if (rho0.min() < 0.0) throw NegativeInput("initial density must be nonnegative");
    if (!(t_end >= 0.0)) throw Error("run.t_end must be >= 0");
    if (!(slab_len > 0.0)) throw Error("run.slab must be positive");
    OperatorCache cache(problem, rho0.grid());
    Recorder rec(problem, rho0, 0.0, std::move(options));
    int halvings = 0;
    const double tol = 1e-12 * std::max(1.0, t_end);
    while (rec.time() < t_end - tol) {
        const double t0 = rec.time();
        const Slab slab = Slab::covering(t0, std::min(t0 + slab_len, t_end), problem.params.dt_max);
        try {
            auto res = detail::picard_iterate(rec.density(), problem, slab, nullptr, cache);
            detail::regenerate(rec, problem, res.slab, cache);
            rec.add_slab(SlabRecord{res.slab.t0, res.slab.t1, res.slab.steps, res.iterations, res.history});
        } catch (const NoContraction& e) {
            if (++halvings > 6) throw SlabCollapse(std::string("slab halved six times without contraction: ") + e.what());
            slab_len *= 0.5;
            std::ostringstream msg;
            msg << "no contraction on [" << slab.t0 << ", " << slab.t1 << "]; slab length now " << slab_len;
            log::warn(msg.str());
        }
    }
    detail::close(rec, problem, cache);
    return std::move(rec).finish();
}

/// Unmollified coupled stepping: Stokes from the current density, then one continuity step,
/// with the step chosen from the step bound of that velocity.
inline Trajectory direct_march(const ScalarField& rho0, const CoupledProblem& problem, double t_end,
                               RecorderOptions options = {}) {
    problem.params.validate();
    if (problem.params.delta != 0.0) throw Error("direct stepping runs the unmollified system (delta = 0)");
    if (rho0.min() < 0.0) throw NegativeInput("initial density must be nonnegative");
    if (!(t_end >= 0.0)) throw Error("run.t_end must be >= 0");
    OperatorCache cache(problem, rho0.grid());
    const MollifierKernel identity(0.0, rho0.grid());
    Recorder rec(problem, rho0, 0.0, std::move(options));
    const double tol = 1e-12 * std::max(1.0, t_end);
    while (rec.time() < t_end - tol) {
        const auto u = stokes_response(cache, problem, identity, rec.density(), rec.time());
        rec.observe(u);
        double dt = cfl_dt(u, problem.params);
        if (rec.time() + dt > t_end - tol) dt = t_end - rec.time();
        rec.step(u, u, dt);
    }
    detail::close(rec, problem, cache);
    return std::move(rec).finish();
}

}  // namespace aniso_stokes
