#pragma once

// Experiment dispatch behind the CLI: materializes the output directory,
// echoes the effective configuration, runs the requested mode, and writes
// its artifacts. A partial run leaves an INCOMPLETE marker carrying the
// error text.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "sie2d/config.hpp"
#include "sie2d/convergence.hpp"
#include "sie2d/io.hpp"
#include "sie2d/selfcheck.hpp"

namespace sie2d {

namespace detail {

inline void run_simulate(const RunConfig& cfg, const std::filesystem::path& out) {
    const NoiseSpectrum spectrum =
        cfg.c0 == 0.0 ? NoiseSpectrum::zero(cfg.N) : build_spectrum(cfg.N, cfg.c0, cfg.r);
    const BrownianTable table = sample_brownian_table(spectrum, static_cast<std::uint64_t>(cfg.n),
                                                      cfg.T, cfg.seed, cfg.path_id);
    StepperConfig stepper;
    stepper.tau = cfg.T / cfg.n;
    stepper.solver = cfg.solver;
    stepper.fp_tol = cfg.fp_tol;
    stepper.fp_max_iter = cfg.fp_max_iter;
    stepper.dense_dim_cap = cfg.dense_dim_cap;
    stepper.diagnostics = cfg.diagnostics;

    const SpectralField xi0 = make_initial_condition(cfg.xi0, cfg.N);
    const Trajectory traj = simulate_path(xi0, spectrum, table, 0, stepper);

    TrajectoryMeta meta{cfg.seed, cfg.path_id, cfg.c0, cfg.r};
    std::ofstream os(out / "trajectory.siet", std::ios::binary);
    if (!os) throw std::runtime_error("cannot open trajectory.siet for writing");
    write_trajectory(os, traj, meta);

    if (cfg.diagnostics) {
        write_text_file(out / "diagnostics.csv", diagnostics_csv(traj));
        int guarded = 0;
        for (const auto& d : traj.diags) guarded += d.contraction_warning ? 1 : 0;
        if (guarded > 0)
            std::cerr << "warning: step-size guard tripped on " << guarded << " of "
                      << traj.diags.size() << " steps (tau ||B|| estimate >= 1/2)\n";
    } else {
        std::string csv = "step,t,l2\n";
        for (std::size_t i = 1; i < traj.states.size(); ++i)
            csv += std::to_string(i) + "," + format_double(traj.times[i]) + "," +
                   format_double(l2_norm(traj.states[i])) + "\n";
        write_text_file(out / "diagnostics.csv", csv);
    }

    if (cfg.dump_noise) {
        std::ofstream ns(out / "noise.siew", std::ios::binary);
        if (!ns) throw std::runtime_error("cannot open noise.siew for writing");
        write_noise_table(ns, table);
    }
}

inline void run_converge(const RunConfig& cfg, const std::filesystem::path& out) {
    const ErrorReport report = pathwise_error_study(cfg.study());
    write_text_file(out / "errors.csv", errors_csv(report));
    write_text_file(out / "summary.csv", summary_csv(report));
    write_text_file(out / "fits.csv", fits_csv(report));
    if (report.aborted_count > 0)
        std::cerr << "warning: " << report.aborted_count << " path(s) aborted on solver failures\n";
    for (const auto& p : report.paths)
        if (!p.aborted && !p.fit.degenerate)
            std::cout << "path " << p.path_id << ": slope " << format_double(p.fit.slope)
                      << " (R^2 " << format_double(p.fit.r_squared) << ")\n";
    if (!report.pooled.degenerate)
        std::cout << "pooled: slope " << format_double(report.pooled.slope) << " (R^2 "
                  << format_double(report.pooled.r_squared) << ")\n";
}

inline void run_prob_order(const RunConfig& cfg, const std::filesystem::path& out) {
    const ExceedanceReport report = probability_order_study(cfg.study(), cfg.betas);
    write_text_file(out / "errors.csv", errors_csv(report.study));
    write_text_file(out / "exceedance.csv", exceedance_csv(report));
    write_text_file(out / "exceedance_trend.csv", exceedance_trend_csv(report));
    for (const auto& t : report.trends)
        std::cout << "beta " << format_double(t.beta) << ": coarsest "
                  << format_double(t.coarsest_fraction) << " -> finest "
                  << format_double(t.finest_fraction)
                  << (t.finest_le_coarsest ? " (non-increasing endpoint)" : " (INCREASED; soft warning)")
                  << "\n";
}

inline int run_selfcheck_mode() {
    const auto results = run_selfcheck();
    int failures = 0;
    std::printf("%-28s %-6s %s\n", "check", "status", "detail");
    for (const auto& r : results) {
        const char* status = r.pass ? "PASS" : (r.soft ? "WARN" : "FAIL");
        if (!r.pass && !r.soft) ++failures;
        std::printf("%-28s %-6s %s\n", r.name.c_str(), status, r.detail.c_str());
    }
    std::printf("%d/%zu checks passed\n", static_cast<int>(results.size()) - failures, results.size());
    return failures == 0 ? 0 : 1;
}

}  // namespace detail

// Execute a validated configuration. Returns the process exit status.
inline int run(const RunConfig& cfg) {
    if (cfg.mode == RunMode::kSelfcheck) return detail::run_selfcheck_mode();

    const std::filesystem::path out(cfg.out);
    std::filesystem::create_directories(out);
    write_text_file(out / "effective.cfg", serialize_config(cfg));
    try {
        switch (cfg.mode) {
            case RunMode::kSimulate: detail::run_simulate(cfg, out); break;
            case RunMode::kConverge: detail::run_converge(cfg, out); break;
            case RunMode::kProbOrder: detail::run_prob_order(cfg, out); break;
            case RunMode::kSelfcheck: break;
        }
    } catch (const std::exception& e) {
        write_text_file(out / "INCOMPLETE", std::string("run aborted: ") + e.what() + "\n");
        throw;
    }
    return 0;
}

}  // namespace sie2d
