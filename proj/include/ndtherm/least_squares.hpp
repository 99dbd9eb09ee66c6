#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ndtherm/errors.hpp"
#include "ndtherm/linalg.hpp"

namespace ndtherm {

using ResidualFn = std::function<std::vector<double>(std::span<const double>)>;
/// Fills jac (residuals x parameters, row-major).
using JacobianFn =
    std::function<void(std::span<const double>, std::size_t n_residuals, std::vector<double>& jac)>;

/// Box-bounded nonlinear least squares problem. Bounds may be empty
/// (unbounded); when present they must match the parameter count.
struct LeastSquaresProblem {
    ResidualFn residual;
    JacobianFn jacobian;  // optional; central finite differences otherwise
    std::vector<double> theta0;
    std::vector<double> lower;
    std::vector<double> upper;
    double step_tol = 1e-10;
    double grad_tol = 1e-10;
    int max_iterations = 200;
};

struct LeastSquaresReport {
    bool converged = false;
    std::string stop_reason;
    int iterations = 0;             // accepted steps
    std::vector<double> accepted_sse;  // initial SSE followed by each accepted step's SSE
    double lambda_initial = 1e-3;
    double lambda_factor = 10.0;
    double lambda_final = 0.0;
    int residual_evaluations = 0;
};

struct LeastSquaresResult {
    std::vector<double> theta;
    double sse = 0.0;
    LeastSquaresReport report;
};

namespace detail {

inline double fd_step(double theta_i) { return std::max(1e-6, 1e-6 * std::abs(theta_i)); }

inline double sum_squares(std::span<const double> r) {
    double s = 0.0;
    for (const double v : r)
        s += v * v;
    return s;
}

inline bool all_finite(std::span<const double> v) {
    for (const double x : v)
        if (!std::isfinite(x))
            return false;
    return true;
}

inline void clamp_to_bounds(std::span<double> theta, std::span<const double> lower,
                            std::span<const double> upper) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
        if (!lower.empty() && theta[i] < lower[i])
            theta[i] = lower[i];
        if (!upper.empty() && theta[i] > upper[i])
            theta[i] = upper[i];
    }
}

} // namespace detail

/// Damped Gauss-Newton (Levenberg-Marquardt): solve
/// (J^T J + lambda * diag(J^T J)) delta = -J^T r, accept a step only when
/// the SSE decreases, dividing lambda by nu on acceptance and multiplying
/// by nu on rejection. Parameters are clamped to the bounds after every
/// step. Stops on step or gradient tolerance or the iteration cap.
inline LeastSquaresResult least_squares(const LeastSquaresProblem& p) {
    const std::size_t np = p.theta0.size();
    if (np == 0)
        throw ValidationError("least_squares: empty parameter vector");
    if ((!p.lower.empty() && p.lower.size() != np) || (!p.upper.empty() && p.upper.size() != np))
        throw ValidationError("least_squares: bounds length mismatch");
    for (std::size_t i = 0; i < np; ++i) {
        if (!p.lower.empty() && !p.upper.empty() && p.lower[i] > p.upper[i])
            throw ValidationError("least_squares: lower bound above upper bound");
        if (!p.lower.empty() && p.theta0[i] < p.lower[i])
            throw ValidationError("least_squares: initial parameters below lower bound");
        if (!p.upper.empty() && p.theta0[i] > p.upper[i])
            throw ValidationError("least_squares: initial parameters above upper bound");
    }

    LeastSquaresResult res;
    res.theta = p.theta0;
    LeastSquaresReport& rep = res.report;

    std::vector<double> r = p.residual(res.theta);
    ++rep.residual_evaluations;
    if (!detail::all_finite(r))
        throw NonFiniteResidual("least_squares: residual not finite at initial parameters");
    const std::size_t m = r.size();
    if (m < np)
        throw ValidationError("least_squares: fewer residuals than parameters");

    double sse = detail::sum_squares(r);
    rep.accepted_sse.push_back(sse);

    const auto eval_jacobian = [&](std::span<const double> theta, std::vector<double>& jac) {
        if (p.jacobian) {
            p.jacobian(theta, m, jac);
            return;
        }
        jac.assign(m * np, 0.0);
        std::vector<double> th(theta.begin(), theta.end());
        for (std::size_t i = 0; i < np; ++i) {
            const double h = detail::fd_step(theta[i]);
            const double saved = th[i];
            th[i] = saved + h;
            const std::vector<double> rp = p.residual(th);
            th[i] = saved - h;
            const std::vector<double> rm = p.residual(th);
            th[i] = saved;
            rep.residual_evaluations += 2;
            for (std::size_t k = 0; k < m; ++k)
                jac[k * np + i] = (rp[k] - rm[k]) / (2.0 * h);
        }
    };

    constexpr double lambda_max = 1e12;
    double lambda = rep.lambda_initial;
    std::vector<double> jac, grad(np), delta(np), trial(np);

    for (int iter = 0; iter < p.max_iterations; ++iter) {
        eval_jacobian(res.theta, jac);

        // grad = J^T r
        double grad_inf = 0.0;
        for (std::size_t i = 0; i < np; ++i) {
            double g = 0.0;
            for (std::size_t k = 0; k < m; ++k)
                g += jac[k * np + i] * r[k];
            grad[i] = g;
            grad_inf = std::max(grad_inf, std::abs(g));
        }
        if (grad_inf < p.grad_tol) {
            rep.converged = true;
            rep.stop_reason = "gradient tolerance";
            break;
        }

        SymMatrix jtj(np);
        double max_diag = 0.0;
        for (std::size_t i = 0; i < np; ++i) {
            for (std::size_t j = i; j < np; ++j) {
                double v = 0.0;
                for (std::size_t k = 0; k < m; ++k)
                    v += jac[k * np + i] * jac[k * np + j];
                jtj.set(i, j, v);
            }
            max_diag = std::max(max_diag, jtj(i, i));
        }

        bool stepped = false;
        while (true) {
            SymMatrix damped = jtj;
            for (std::size_t i = 0; i < np; ++i) {
                // Marquardt scaling, with a floor so dead columns stay solvable
                const double d = std::max(jtj(i, i), 1e-14 * std::max(max_diag, 1.0));
                damped.set(i, i, jtj(i, i) + lambda * d);
            }

            bool solved = true;
            try {
                const CholeskyFactor f = cholesky(damped, 0.0);
                std::vector<double> rhs(np);
                for (std::size_t i = 0; i < np; ++i)
                    rhs[i] = -grad[i];
                delta = solve_chol(f, rhs);
                solved = detail::all_finite(delta);
            } catch (const NotPositiveDefinite&) {
                solved = false;
            }

            if (solved) {
                double step_inf = 0.0;
                for (const double d : delta)
                    step_inf = std::max(step_inf, std::abs(d));
                if (step_inf < p.step_tol) {
                    rep.converged = true;
                    rep.stop_reason = "step tolerance";
                    break;
                }

                for (std::size_t i = 0; i < np; ++i)
                    trial[i] = res.theta[i] + delta[i];
                detail::clamp_to_bounds(trial, p.lower, p.upper);

                std::vector<double> r_trial = p.residual(trial);
                ++rep.residual_evaluations;
                const double sse_trial = detail::all_finite(r_trial)
                                             ? detail::sum_squares(r_trial)
                                             : std::numeric_limits<double>::infinity();
                if (sse_trial < sse) {
                    res.theta = trial;
                    r = std::move(r_trial);
                    sse = sse_trial;
                    rep.accepted_sse.push_back(sse);
                    ++rep.iterations;
                    lambda = std::max(lambda / rep.lambda_factor, 1e-12);
                    stepped = true;
                    break;
                }
            }

            lambda *= rep.lambda_factor;
            if (lambda > lambda_max)
                throw SingularNormalEquations(
                    "least_squares: no acceptable step up to lambda=" + std::to_string(lambda_max));
        }
        if (!stepped)
            break;  // converged inside the damping loop
    }

    if (rep.stop_reason.empty()) {
        rep.converged = false;
        rep.stop_reason = "max iterations";
    }
    rep.lambda_final = lambda;
    res.sse = sse;
    return res;
}

} // namespace ndtherm
