#pragma once

// Convergence experiments: multi-level runs on a common Brownian path
// against a finer self-consistent reference, sup-in-time L2 errors,
// log-log order fits, and exceedance-probability tables.
//
// Every level of a path consumes coarsened increments of one table sampled
// at the reference resolution, so all step sizes see the same realization.
// The reference trajectory is the scheme itself at tau_ref = tau_min /
// 2^ref_extra on the same Lambda_N; temporal order is measured with the
// spatial truncation held fixed.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "sie2d/field.hpp"
#include "sie2d/noise.hpp"
#include "sie2d/stepper.hpp"

namespace sie2d {

struct Xi0Spec {
    enum class Kind { kPreset3Mode, kRandomSmooth };

    Kind kind = Kind::kPreset3Mode;
    double decay = 4.0;       // random-smooth: coefficient law |k|^{-decay} * N(0,1)
    std::uint64_t seed = 0;   // random-smooth draw seed

    friend bool operator==(const Xi0Spec&, const Xi0Spec&) = default;
};

inline SpectralField make_initial_condition(const Xi0Spec& spec, int n) {
    SpectralField xi(n);
    if (spec.kind == Xi0Spec::Kind::kPreset3Mode) {
        xi.set_coeff({1, 0}, 1.0);
        xi.set_coeff({0, 1}, 1.0);
        xi.set_coeff({1, 1}, 0.5);
        return xi;
    }
    detail::GaussianStream stream(detail::splitmix64(spec.seed ^ 0xa02cf7d6a9f73e1bULL));
    for (const ModeIndex k : modes_in_lambda(n))
        xi.slot(k) = std::pow(static_cast<double>(k.norm_sq()), -0.5 * spec.decay) * stream.next();
    return xi;
}

struct StudyConfig {
    int N = 16;
    double T = 0.5;
    Xi0Spec xi0;
    std::optional<SpectralField> xi0_field;  // explicit initial state; overrides xi0 when set
    double c0 = 0.1;
    double r = 6.0;
    std::vector<int> levels = {16, 32, 64, 128, 256, 512};  // step counts, dyadically nested
    int ref_extra = 2;    // reference runs at max(levels) * 2^ref_extra steps
    int paths = 3;
    std::uint64_t master_seed = 1;
    int workers = 1;
    StepperConfig stepper;       // tau is set per level
    bool observables = true;     // also record H1 errors of u and pi

    int ref_steps() const { return levels.empty() ? 0 : levels.back() << ref_extra; }

    NoiseSpectrum spectrum() const {
        return c0 == 0.0 ? NoiseSpectrum::zero(N) : build_spectrum(N, c0, r);
    }

    void validate() const {
        require_valid_truncation(N);
        if (!(T > 0.0)) throw std::invalid_argument("final time must be positive");
        if (c0 < 0.0) throw std::invalid_argument("noise amplitude must be nonnegative");
        if (c0 > 0.0 && !(r > 0.0)) throw std::invalid_argument("decay exponent must be positive");
        if (levels.empty()) throw std::invalid_argument("at least one level is required");
        if (ref_extra < 0) throw std::invalid_argument("ref_extra must be >= 0");
        if (paths < 1) throw std::invalid_argument("at least one path is required");
        if (workers < 1) throw std::invalid_argument("at least one worker is required");
        const int n_max = levels.back();
        int prev = 0;
        for (int n : levels) {
            if (n <= prev) throw std::invalid_argument("levels must be strictly increasing");
            if (n < 1 || n_max % n != 0 || ((n_max / n) & (n_max / n - 1)) != 0)
                throw std::invalid_argument("levels must be dyadically nested: " + std::to_string(n) +
                                            " does not divide " + std::to_string(n_max) +
                                            " by a power of two");
            prev = n;
        }
    }
};

struct OrderFit {
    double slope = 0.0;
    double intercept = 0.0;   // intercept of log(error) vs log(tau)
    double r_squared = 0.0;
    int n_points = 0;
    bool degenerate = false;  // set instead of a slope when errors vanish
};

// Ordinary least squares of log(error) on log(tau).
inline OrderFit fit_order(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3)
        throw std::invalid_argument("order fit needs at least 3 points, got " +
                                    std::to_string(points.size()));
    OrderFit fit;
    fit.n_points = static_cast<int>(points.size());
    for (const auto& [tau, err] : points) {
        if (!(tau > 0.0)) throw std::invalid_argument("order fit requires positive step sizes");
        if (!(err > 0.0)) {
            fit.degenerate = true;
            return fit;
        }
    }
    const double n = static_cast<double>(points.size());
    double sx = 0.0, sy = 0.0;
    for (const auto& [tau, err] : points) {
        sx += std::log(tau);
        sy += std::log(err);
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [tau, err] : points) {
        const double dx = std::log(tau) - mx;
        const double dy = std::log(err) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw std::invalid_argument("order fit requires at least two distinct step sizes");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    const double ss_res = syy - fit.slope * sxy;
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

// Per-step H1 errors (||u - u_ref||_1, ||pi - pi_ref||_1) at the coarse
// grid points, which must embed in the reference grid.
inline std::vector<std::pair<double, double>> observable_errors(const Trajectory& coarse,
                                                                const Trajectory& reference) {
    if (coarse.n_steps() < 1 || reference.n_steps() < 1)
        throw std::invalid_argument("observable_errors needs non-empty trajectories");
    if (coarse.t_final != reference.t_final)
        throw std::invalid_argument("trajectories cover different time horizons");
    if (reference.n_steps() % coarse.n_steps() != 0)
        throw std::invalid_argument("coarse grid does not embed in the reference grid");
    const int stride = reference.n_steps() / coarse.n_steps();

    std::vector<std::pair<double, double>> out;
    out.reserve(static_cast<std::size_t>(coarse.n_steps()));
    for (int i = 1; i <= coarse.n_steps(); ++i) {
        const auto [u, pi] = recover_observables(coarse.states[static_cast<std::size_t>(i)]);
        const auto [u_ref, pi_ref] =
            recover_observables(reference.states[static_cast<std::size_t>(i) * stride]);
        SpectralField dpi = pi;
        dpi -= pi_ref;
        out.emplace_back(h1_norm(u - u_ref), sobolev_norm(dpi, 1));
    }
    return out;
}

struct PathLevelError {
    int path_id = 0;
    int level_steps = 0;
    double tau = 0.0;
    double sup_l2 = 0.0;      // sup_i |xi_i - xi_ref(t_i)|_2
    double sup_u_h1 = 0.0;    // sup_i ||u_i - u_ref(t_i)||_1
    double sup_pi_h1 = 0.0;   // sup_i ||pi_i - pi_ref(t_i)||_1
    double sup_obs = 0.0;     // sup_i of the summed observable error
};

struct PathResult {
    int path_id = 0;
    bool aborted = false;
    std::string abort_reason;
    std::vector<PathLevelError> rows;  // one per level, coarse to fine
    OrderFit fit;                      // fit of sup_l2 against tau
};

struct LevelAggregate {
    int level_steps = 0;
    double tau = 0.0;
    int n_paths = 0;
    double mean_l2 = 0.0;
    double median_l2 = 0.0;
    double max_l2 = 0.0;
    double mean_obs = 0.0;
};

struct ErrorReport {
    StudyConfig config;
    std::vector<PathResult> paths;
    OrderFit pooled;
    std::vector<LevelAggregate> aggregates;
    int aborted_count = 0;
    bool median_monotone = true;  // soft: medians non-increasing under refinement
};

namespace detail {

// Execute fn(path_id) for all paths on `workers` threads. Exceptions are
// captured and rethrown after join; results must be written into
// preallocated per-path slots so scheduling cannot reorder anything.
template <typename Fn>
inline void run_paths(int paths, int workers, Fn&& fn) {
    if (workers <= 1) {
        for (int p = 0; p < paths; ++p) fn(p);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int p = next.fetch_add(1); p < paths; p = next.fetch_add(1)) fn(p);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// Cheap end-to-end re-assertion of the common-path design: adjacent
// windows at one level sum bitwise to their parent window.
inline void assert_telescoping(const NoiseSpectrum& spectrum, const BrownianTable& table, int level) {
    if (level < 1 || table.n_fine() >> level < 1) return;
    const SpectralField parent = wcurl_increment(spectrum, table, level, 0);
    SpectralField halves = wcurl_increment(spectrum, table, level - 1, 0);
    halves += wcurl_increment(spectrum, table, level - 1, 1);
    if (!(parent == halves))
        throw std::logic_error("dyadic increment telescoping violated; common-path design broken");
}

inline int integer_log2(int value) {
    int level = 0;
    while ((1 << level) < value) ++level;
    return level;
}

}  // namespace detail

// Multi-level pathwise error study against the fine self-consistent
// reference. Throws when more than 20% of paths abort on solver failures.
inline ErrorReport pathwise_error_study(const StudyConfig& cfg) {
    cfg.validate();
    const NoiseSpectrum spectrum = cfg.spectrum();
    const SpectralField xi0 = cfg.xi0_field ? *cfg.xi0_field : make_initial_condition(cfg.xi0, cfg.N);
    if (cfg.xi0_field) cfg.xi0_field->require_truncation(cfg.N);
    const int n_ref = cfg.ref_steps();

    ErrorReport report;
    report.config = cfg;
    report.paths.resize(static_cast<std::size_t>(cfg.paths));

    detail::run_paths(cfg.paths, cfg.workers, [&](int path_id) {
        PathResult result;
        result.path_id = path_id;
        try {
            const BrownianTable table = sample_brownian_table(
                spectrum, static_cast<std::uint64_t>(n_ref), cfg.T, cfg.master_seed,
                static_cast<std::uint64_t>(path_id));
            const Trajectory reference = simulate_path(xi0, spectrum, table, 0, cfg.stepper);

            std::vector<std::pair<double, double>> fit_points;
            for (const int n_steps : cfg.levels) {
                const int level = detail::integer_log2(n_ref / n_steps);
                detail::assert_telescoping(spectrum, table, level);
                const Trajectory coarse = simulate_path(xi0, spectrum, table, level, cfg.stepper);

                PathLevelError row;
                row.path_id = path_id;
                row.level_steps = n_steps;
                row.tau = coarse.tau;
                const int stride = n_ref / n_steps;
                for (int i = 1; i <= n_steps; ++i) {
                    SpectralField diff = coarse.states[static_cast<std::size_t>(i)];
                    diff -= reference.states[static_cast<std::size_t>(i) * stride];
                    row.sup_l2 = std::max(row.sup_l2, l2_norm(diff));
                }
                if (cfg.observables) {
                    for (const auto& [u_err, pi_err] : observable_errors(coarse, reference)) {
                        row.sup_u_h1 = std::max(row.sup_u_h1, u_err);
                        row.sup_pi_h1 = std::max(row.sup_pi_h1, pi_err);
                        row.sup_obs = std::max(row.sup_obs, u_err + pi_err);
                    }
                }
                fit_points.emplace_back(row.tau, row.sup_l2);
                result.rows.push_back(row);
            }
            if (fit_points.size() >= 3)
                result.fit = fit_order(fit_points);
            else
                result.fit.degenerate = true;
        } catch (const solver_failure& e) {
            result.aborted = true;
            result.abort_reason = e.what();
            result.rows.clear();
        }
        report.paths[static_cast<std::size_t>(path_id)] = std::move(result);
    });

    for (const auto& p : report.paths)
        if (p.aborted) ++report.aborted_count;
    if (5 * report.aborted_count > cfg.paths)
        throw std::runtime_error("study failed: " + std::to_string(report.aborted_count) + " of " +
                                 std::to_string(cfg.paths) + " paths aborted");

    // Per-level aggregates over completed paths, reduced in path order.
    std::vector<std::pair<double, double>> pooled_points;
    for (std::size_t j = 0; j < cfg.levels.size(); ++j) {
        LevelAggregate agg;
        agg.level_steps = cfg.levels[j];
        std::vector<double> l2s;
        double obs_sum = 0.0;
        for (const auto& p : report.paths) {
            if (p.aborted) continue;
            const auto& row = p.rows[j];
            agg.tau = row.tau;
            l2s.push_back(row.sup_l2);
            obs_sum += row.sup_obs;
            agg.max_l2 = std::max(agg.max_l2, row.sup_l2);
            pooled_points.emplace_back(row.tau, row.sup_l2);
        }
        agg.n_paths = static_cast<int>(l2s.size());
        if (!l2s.empty()) {
            double sum = 0.0;
            for (double v : l2s) sum += v;
            agg.mean_l2 = sum / static_cast<double>(l2s.size());
            agg.mean_obs = obs_sum / static_cast<double>(l2s.size());
            std::sort(l2s.begin(), l2s.end());
            const std::size_t mid = l2s.size() / 2;
            agg.median_l2 = l2s.size() % 2 == 1 ? l2s[mid] : 0.5 * (l2s[mid - 1] + l2s[mid]);
        }
        report.aggregates.push_back(agg);
    }
    for (std::size_t j = 1; j < report.aggregates.size(); ++j)
        if (report.aggregates[j].median_l2 > report.aggregates[j - 1].median_l2)
            report.median_monotone = false;

    bool any_positive = false;
    for (const auto& [tau, err] : pooled_points) any_positive = any_positive || err > 0.0;
    if (pooled_points.size() >= 3 && any_positive)
        report.pooled = fit_order(pooled_points);
    else
        report.pooled.degenerate = true;
    return report;
}

struct ExceedanceCell {
    int level_steps = 0;
    double tau = 0.0;
    double beta = 0.0;
    double threshold = 0.0;  // tau^beta
    int n_paths = 0;
    int n_exceed = 0;
    double fraction = 0.0;
    double ci_low = 0.0;     // 95% Wilson interval
    double ci_high = 0.0;
};

struct BetaTrend {
    double beta = 0.0;
    double coarsest_fraction = 0.0;
    double finest_fraction = 0.0;
    bool finest_le_coarsest = true;
    bool non_increasing = true;  // across every refinement step
};

struct ExceedanceReport {
    ErrorReport study;
    std::vector<ExceedanceCell> cells;  // level-major, beta-minor
    std::vector<BetaTrend> trends;
};

// 95% Wilson score interval for a binomial proportion.
inline std::pair<double, double> binomial_ci(int successes, int trials) {
    if (trials <= 0) return {0.0, 0.0};
    constexpr double z = 1.959963984540054;  // 97.5% normal quantile
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double spread = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    const double lo = successes == 0 ? 0.0 : std::max(0.0, center - spread);
    const double hi = successes == trials ? 1.0 : std::min(1.0, center + spread);
    return {lo, hi};
}

// Threshold an existing study at tau^beta per (level, beta); separated from
// the study runner so the deterministic comparison logic is testable on
// synthetic error tables.
inline ExceedanceReport tabulate_exceedance(ErrorReport study, const std::vector<double>& betas) {
    if (betas.empty()) throw std::invalid_argument("at least one beta is required");
    for (double b : betas)
        if (!(b > 0.0 && b < 1.0))
            throw std::invalid_argument("beta must lie in (0, 1), got " + std::to_string(b));

    ExceedanceReport report;
    report.study = std::move(study);
    const auto& levels = report.study.config.levels;

    for (std::size_t j = 0; j < levels.size(); ++j) {
        double tau = 0.0;
        for (const auto& p : report.study.paths)
            if (!p.aborted) tau = p.rows[j].tau;
        for (const double beta : betas) {
            ExceedanceCell cell;
            cell.level_steps = levels[j];
            cell.tau = tau;
            cell.beta = beta;
            cell.threshold = std::pow(tau, beta);
            for (const auto& p : report.study.paths) {
                if (p.aborted) continue;
                ++cell.n_paths;
                if (p.rows[j].sup_l2 >= cell.threshold) ++cell.n_exceed;
            }
            cell.fraction = cell.n_paths > 0
                                ? static_cast<double>(cell.n_exceed) / static_cast<double>(cell.n_paths)
                                : 0.0;
            std::tie(cell.ci_low, cell.ci_high) = binomial_ci(cell.n_exceed, cell.n_paths);
            report.cells.push_back(cell);
        }
    }

    for (std::size_t b = 0; b < betas.size(); ++b) {
        BetaTrend trend;
        trend.beta = betas[b];
        double prev = 0.0;
        for (std::size_t j = 0; j < levels.size(); ++j) {
            const double frac = report.cells[j * betas.size() + b].fraction;
            if (j == 0) {
                trend.coarsest_fraction = frac;
            } else if (frac > prev) {
                trend.non_increasing = false;
            }
            trend.finest_fraction = frac;
            prev = frac;
        }
        trend.finest_le_coarsest = trend.finest_fraction <= trend.coarsest_fraction;
        report.trends.push_back(trend);
    }
    return report;
}

// Empirical exceedance fractions P(sup error >= tau^beta) per level and
// beta, with trend flags. Trend violations are reported, never thrown.
inline ExceedanceReport probability_order_study(const StudyConfig& cfg, const std::vector<double>& betas) {
    if (betas.empty()) throw std::invalid_argument("at least one beta is required");
    for (double b : betas)
        if (!(b > 0.0 && b < 1.0))
            throw std::invalid_argument("beta must lie in (0, 1), got " + std::to_string(b));
    return tabulate_exceedance(pathwise_error_study(cfg), betas);
}

}  // namespace sie2d
