#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "aniso_stokes/aniso_stokes.hpp"

namespace as = aniso_stokes;

namespace {

int report(bool passed, bool strict) {
    if (!passed) std::cout << "one or more audits FAILED\n";
    return strict && !passed ? 1 : 0;
}

int check_tensor(const as::RunConfig& cfg, bool strict) {
    const auto tensor = as::make_viscosity(cfg);
    std::vector<as::VectorField> samples;
    for (int i = 0; i < 10; ++i) samples.push_back(as::random_smooth_field(cfg.grid, cfg.seed + static_cast<std::uint64_t>(i)));
    const auto rep = as::audit_hypotheses(tensor, samples, 0.0, cfg.seed);
    std::cout << as::format_report(rep);
    return report(rep.passed(), strict);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Anisotropic compressible Stokes solver and audit harness"};
    app.footer("\n" + as::config_help());
    std::string command;
    std::string config_path;
    std::string out_dir;
    bool strict = false;
    bool quiet = false;
    app.add_option("command", command, "run | sweep-delta | sweep-eps | defect-study | check-tensor")
        ->required()
        ->check(CLI::IsMember({"run", "sweep-delta", "sweep-eps", "defect-study", "check-tensor"}));
    app.add_option("config", config_path, "configuration file")->required();
    app.add_option("--out", out_dir, "output directory (default: run.output of the config)");
    app.add_flag("--strict", strict, "exit with status 1 when any audit fails");
    app.add_flag("--quiet", quiet, "suppress informational log lines");
    CLI11_PARSE(app, argc, argv);

    as::log::set_quiet(quiet);
    try {
        const auto cfg = as::parse_config(config_path);
        const std::filesystem::path out = out_dir.empty() ? std::filesystem::path(cfg.output) : std::filesystem::path(out_dir);

        if (command == "check-tensor") return check_tensor(cfg, strict);
        if (command == "run") {
            const auto res = as::run(cfg, out);
            std::cout << res.summary << "wrote " << (out / "diagnostics.csv").string() << '\n';
            return report(res.passed, strict);
        }
        if (command == "sweep-delta") {
            const auto res = as::sweep_delta(cfg, cfg.sweep_deltas, out);
            std::cout << "delta  gap_to_next  ratio\n";
            for (const auto& r : res.rows) std::cout << r.delta << "  " << r.gap_to_next << "  " << r.ratio << '\n';
            std::cout << "finest level to unmollified run: " << res.finest_to_direct << '\n';
            std::cout << "wrote " << (out / "sweep_delta.csv").string() << '\n';
            return report(res.passed(), strict);
        }
        if (command == "sweep-eps") {
            const auto res = as::sweep_eps_eta(cfg, cfg.sweep_levels, out);
            std::cout << "level  mass_error  min_slack  pgamma_l2\n";
            for (const auto& r : res.rows)
                std::cout << r.level << "  " << r.mass_error << "  " << r.min_energy_slack << "  " << r.pgamma_l2 << '\n';
            std::cout << "pressure L2 spread (max/min): " << res.spread << '\n';
            std::cout << "wrote " << (out / "sweep_eps.csv").string() << '\n';
            return report(res.passed(), strict);
        }
        const auto res = as::defect_study(cfg, cfg.defect_ratios, cfg.defect_windows, out);
        std::cout << "ratio  window  lhs  rhs  pass\n";
        for (const auto& r : res.rows)
            std::cout << r.ratio << "  " << r.audit.window << "  " << r.audit.lhs << "  " << r.audit.rhs << "  "
                      << (r.audit.passed ? "yes" : "no") << '\n';
        std::cout << "wrote " << (out / "defect_study.csv").string() << '\n';
        return report(res.passed(), strict);
    } catch (const as::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
