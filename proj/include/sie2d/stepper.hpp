#pragma once

// Splitting semi-implicit Euler step for the stochastic vorticity equation:
// solve the frozen-advector linear system
//   (I + tau B(xi)) xi_bar = xi,      B(xi) zeta = Pi_N[(K*xi) . grad zeta],
// then add the curl-noise increment. Skew-symmetry of B gives the exact
// energy identity |xi_bar|^2 + |xi - xi_bar|^2 = |xi|^2, which implies the
// L2 contraction of the implicit half-step.
//
// The linear system is solved by Richardson iteration
//   x_{m+1} = xi - tau B(xi) x_m,
// which contracts whenever tau ||B|| < 1; outside that regime (or on
// non-convergence) a dense assembled solve takes over when the Galerkin
// dimension permits.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sie2d/field.hpp"
#include "sie2d/noise.hpp"
#include "sie2d/operators.hpp"
#include "sie2d/transforms.hpp"

namespace sie2d {

enum class SolverKind { kFixedPoint, kDense };

struct StepperConfig {
    double tau = 0.0;
    SolverKind solver = SolverKind::kFixedPoint;
    double fp_tol = 1e-12;      // relative residual tolerance
    int fp_max_iter = 200;
    int dense_dim_cap = 4096;   // max Galerkin dimension for the dense fallback
    bool diagnostics = false;   // record per-step extras in simulate_path

    void validate() const {
        if (!(tau > 0.0)) throw std::invalid_argument("step size tau must be positive");
        if (!(fp_tol > 0.0)) throw std::invalid_argument("fp_tol must be positive");
        if (fp_max_iter < 1) throw std::invalid_argument("fp_max_iter must be >= 1");
        if (dense_dim_cap < 0) throw std::invalid_argument("dense_dim_cap must be >= 0");
    }
};

class solver_failure : public std::runtime_error {
  public:
    solver_failure(const std::string& what, double residual, int iterations)
        : std::runtime_error(what), residual_(residual), iterations_(iterations) {}

    double residual() const { return residual_; }
    int iterations() const { return iterations_; }

  private:
    double residual_;
    int iterations_;
};

struct StepDiagnostics {
    int iterations = 0;               // Richardson sweeps (0 when solved densely)
    double residual = 0.0;            // relative residual bound of the returned solution
    bool used_dense = false;
    bool contraction_warning = false; // tau * ||B|| estimate >= 1/2
    double l2 = 0.0;                  // |xi_{i+1}|_2, filled by simulate_path
    double l4 = 0.0;                  // quadrature |xi_{i+1}|_4 when diagnostics are on
};

namespace detail {

inline Eigen::VectorXd field_to_vector(const SpectralField& f, const std::vector<ModeIndex>& modes) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(modes.size()));
    for (std::size_t i = 0; i < modes.size(); ++i) v[static_cast<Eigen::Index>(i)] = f.slot(modes[i]);
    return v;
}

inline SpectralField vector_to_field(const Eigen::VectorXd& v, const std::vector<ModeIndex>& modes, int n) {
    SpectralField f(n);
    for (std::size_t i = 0; i < modes.size(); ++i) f.slot(modes[i]) = v[static_cast<Eigen::Index>(i)];
    return f;
}

// Assemble I + tau B column by column and solve by LU. Doubles as the
// reference route for the fixed-point path in solver-equivalence checks.
inline SpectralField dense_transport_solve(const AdvectionOperator& op, const SpectralField& xi,
                                           double tau, StepDiagnostics* diag) {
    const int n = op.N();
    const auto modes = modes_in_lambda(n);
    const auto dim = static_cast<Eigen::Index>(modes.size());

    Eigen::MatrixXd a(dim, dim);
    SpectralField basis(n);
    for (Eigen::Index j = 0; j < dim; ++j) {
        basis.slot(modes[static_cast<std::size_t>(j)]) = 1.0;
        const SpectralField column = op.apply(basis);
        basis.slot(modes[static_cast<std::size_t>(j)]) = 0.0;
        for (Eigen::Index i = 0; i < dim; ++i)
            a(i, j) = tau * column.slot(modes[static_cast<std::size_t>(i)]);
        a(j, j) += 1.0;
    }

    const Eigen::VectorXd rhs = field_to_vector(xi, modes);
    const Eigen::VectorXd sol = Eigen::PartialPivLU<Eigen::MatrixXd>(a).solve(rhs);
    const double rhs_norm = rhs.norm();
    const double rel_residual = rhs_norm > 0.0 ? (a * sol - rhs).norm() / rhs_norm : 0.0;
    if (diag) {
        diag->used_dense = true;
        diag->iterations = 0;
        diag->residual = rel_residual;
    }
    return vector_to_field(sol, modes, n);
}

}  // namespace detail

// xi_bar with (I + tau B(xi)) xi_bar = xi on Lambda_N, relative residual
// below cfg.fp_tol. Throws solver_failure when neither solver can deliver.
// The linear system has a unique solution, so the optional fixed-point
// starting guess only affects the sweep count.
inline SpectralField implicit_transport_solve(const SpectralField& xi, const StepperConfig& cfg,
                                              StepDiagnostics* diag = nullptr,
                                              const SpectralField* initial_guess = nullptr) {
    cfg.validate();
    const double xi_norm = l2_norm(xi);
    if (xi_norm == 0.0) {
        if (diag) *diag = StepDiagnostics{};
        return xi;
    }

    const AdvectionOperator op(xi);
    const double tau_bnorm = cfg.tau * op.norm_bound();
    const bool dense_allowed = mode_count(xi.N()) <= cfg.dense_dim_cap;
    if (diag) {
        *diag = StepDiagnostics{};
        diag->contraction_warning = tau_bnorm >= 0.5;
    }

    if (cfg.solver == SolverKind::kDense) {
        if (!dense_allowed)
            throw solver_failure("dense solver requested but Galerkin dimension " +
                                     std::to_string(mode_count(xi.N())) + " exceeds cap " +
                                     std::to_string(cfg.dense_dim_cap),
                                 std::numeric_limits<double>::infinity(), 0);
        return detail::dense_transport_solve(op, xi, cfg.tau, diag);
    }

    // No contraction margin: go straight to the assembled solve if we may.
    if (tau_bnorm >= 0.9 && dense_allowed) return detail::dense_transport_solve(op, xi, cfg.tau, diag);

    SpectralField x = initial_guess ? *initial_guess : xi;
    if (initial_guess) initial_guess->require_same_truncation(xi);
    double last_delta = std::numeric_limits<double>::infinity();
    double residual = std::numeric_limits<double>::infinity();
    int growth_streak = 0;
    for (int iter = 1; iter <= cfg.fp_max_iter; ++iter) {
        SpectralField next = xi;
        SpectralField bx = op.apply(x);
        bx *= cfg.tau;
        next -= bx;
        SpectralField delta_field = next;
        delta_field -= x;
        const double delta = l2_norm(delta_field);
        x = std::move(next);
        // ||(I + tau B) x_{m+1} - xi|| = tau ||B (x_{m+1} - x_m)|| <= tau ||B|| delta
        residual = cfg.tau * op.norm_bound() * delta;
        if (!std::isfinite(delta)) break;
        if (residual <= cfg.fp_tol * xi_norm) {
            if (diag) {
                diag->iterations = iter;
                diag->residual = residual / xi_norm;
            }
            return x;
        }
        growth_streak = delta > last_delta ? growth_streak + 1 : 0;
        if (growth_streak >= 5) break;  // diverging; stop wasting sweeps
        last_delta = delta;
    }

    if (dense_allowed) return detail::dense_transport_solve(op, xi, cfg.tau, diag);
    throw solver_failure("fixed-point iteration did not reach tolerance " + std::to_string(cfg.fp_tol) +
                             " within " + std::to_string(cfg.fp_max_iter) +
                             " sweeps and the Galerkin dimension " + std::to_string(mode_count(xi.N())) +
                             " exceeds the dense cap " + std::to_string(cfg.dense_dim_cap) +
                             "; last relative residual " + std::to_string(residual / xi_norm),
                         residual / xi_norm, cfg.fp_max_iter);
}

// One SIE step: implicit transport solve, then the additive noise increment.
inline SpectralField sie_step(const SpectralField& xi, const SpectralField& dw, const StepperConfig& cfg,
                              StepDiagnostics* diag = nullptr) {
    xi.require_same_truncation(dw);
    SpectralField out = implicit_transport_solve(xi, cfg, diag);
    out += dw;
    return out;
}

struct Trajectory {
    double t_final = 0.0;
    double tau = 0.0;
    int level = 0;
    std::vector<double> times;           // t_i = i tau, length n+1
    std::vector<SpectralField> states;   // xi_i, length n+1
    std::vector<StepDiagnostics> diags;  // length n when diagnostics are on

    int n_steps() const { return static_cast<int>(times.empty() ? 0 : times.size() - 1); }
};

// Run the SIE method over the whole table at the given dyadic level. Step
// i+1 consumes exactly the increments in (t_i, t_{i+1}].
inline Trajectory simulate_path(const SpectralField& xi0, const NoiseSpectrum& spectrum,
                                const BrownianTable& table, int level, StepperConfig cfg) {
    if (spectrum.N() != table.N()) throw std::invalid_argument("spectrum and table truncations differ");
    xi0.require_truncation(table.N());
    detail::require_window(table, level, 0);

    const std::uint64_t n = table.n_fine() >> level;
    cfg.tau = table.t_final() * static_cast<double>(std::uint64_t{1} << level) /
              static_cast<double>(table.n_fine());
    cfg.validate();

    Trajectory traj;
    traj.t_final = table.t_final();
    traj.tau = cfg.tau;
    traj.level = level;
    traj.times.reserve(n + 1);
    traj.states.reserve(n + 1);
    traj.times.push_back(0.0);
    traj.states.push_back(xi0);
    if (cfg.diagnostics) traj.diags.reserve(n);

    for (std::uint64_t i = 0; i < n; ++i) {
        const SpectralField dw = wcurl_increment(spectrum, table, level, i);
        StepDiagnostics diag;
        SpectralField next;
        try {
            next = sie_step(traj.states.back(), dw, cfg, cfg.diagnostics ? &diag : nullptr);
        } catch (const solver_failure& e) {
            throw solver_failure("step " + std::to_string(i + 1) + "/" + std::to_string(n) + " at t = " +
                                     std::to_string(traj.times.back()) + ": " + e.what(),
                                 e.residual(), e.iterations());
        }
        if (cfg.diagnostics) {
            diag.l2 = l2_norm(next);
            diag.l4 = lp_grid_norm(next, 4.0);
            traj.diags.push_back(diag);
        }
        traj.times.push_back(static_cast<double>(i + 1) * cfg.tau);
        traj.states.push_back(std::move(next));
    }
    return traj;
}

// u_i = K * xi_i and the pressure recovered from it.
inline std::pair<VelocityField, SpectralField> recover_observables(const SpectralField& xi) {
    VelocityField u = biot_savart(xi);
    SpectralField pi = pressure_from_velocity(u);
    return {std::move(u), std::move(pi)};
}

}  // namespace sie2d
