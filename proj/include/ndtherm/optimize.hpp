#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ndtherm/errors.hpp"

namespace ndtherm {

using ObjectiveFn = std::function<double(std::span<const double>)>;
using GradientFn = std::function<std::vector<double>(std::span<const double>)>;

struct MaximizeOptions {
    std::vector<double> lower;
    std::vector<double> upper;
    double grad_tol = 1e-6;   // on the projected gradient infinity norm
    double step_tol = 1e-13;  // line search dies below this step length
    int max_iterations = 500; // per start
};

struct MaximizeResult {
    std::vector<double> argmax;
    double value = 0.0;
    int best_start = -1;
    std::vector<double> start_values;  // objective at each start point
    bool gradient_converged = false;   // best start ended on the gradient criterion
};

/// Central-difference gradient with per-coordinate step max(1e-6, 1e-6*|x_i|).
inline std::vector<double> finite_difference_gradient(const ObjectiveFn& f,
                                                      std::span<const double> x) {
    std::vector<double> g(x.size());
    std::vector<double> xp(x.begin(), x.end());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = std::max(1e-6, 1e-6 * std::abs(x[i]));
        const double saved = xp[i];
        xp[i] = saved + h;
        const double fp = f(xp);
        xp[i] = saved - h;
        const double fm = f(xp);
        xp[i] = saved;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

namespace detail {

struct AscentOutcome {
    std::vector<double> x;
    double value;
    bool gradient_converged;
};

// Projected gradient ascent with a backtracking line search. The step
// length doubles after a first-try success and halves on rejection, so it
// adapts to the local scale without extra objective evaluations.
inline AscentOutcome ascend(const ObjectiveFn& f, const GradientFn& grad,
                            std::vector<double> x, const MaximizeOptions& o) {
    const std::size_t n = x.size();
    const auto clamp = [&](std::vector<double>& v) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!o.lower.empty() && v[i] < o.lower[i])
                v[i] = o.lower[i];
            if (!o.upper.empty() && v[i] > o.upper[i])
                v[i] = o.upper[i];
        }
    };
    clamp(x);
    double fx = f(x);
    if (!std::isfinite(fx))
        throw NonFiniteObjective("maximize: objective not finite at a start point");

    double step = 1.0;
    bool grad_ok = false;
    std::vector<double> trial(n);
    for (int iter = 0; iter < o.max_iterations; ++iter) {
        std::vector<double> g = grad(x);

        // zero out components that push against an active bound
        double pg_inf = 0.0, pg_norm2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const bool at_lower = !o.lower.empty() && x[i] <= o.lower[i] && g[i] < 0.0;
            const bool at_upper = !o.upper.empty() && x[i] >= o.upper[i] && g[i] > 0.0;
            if (at_lower || at_upper)
                g[i] = 0.0;
            pg_inf = std::max(pg_inf, std::abs(g[i]));
            pg_norm2 += g[i] * g[i];
        }
        if (pg_inf < o.grad_tol) {
            grad_ok = true;
            break;
        }
        const double inv_norm = 1.0 / std::sqrt(pg_norm2);

        double t = step;
        bool accepted = false;
        while (t >= o.step_tol) {
            for (std::size_t i = 0; i < n; ++i)
                trial[i] = x[i] + t * g[i] * inv_norm;
            clamp(trial);
            const double ft = f(trial);
            if (std::isfinite(ft) && ft > fx) {
                step = (t == step) ? 2.0 * t : t;
                x = trial;
                fx = ft;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted)
            break;  // no improving step at any length
    }
    return {std::move(x), fx, grad_ok};
}

} // namespace detail

/// Best local maximum over a list of start points. Each start runs an
/// independent ascent; ties keep the earliest start, so the result is a
/// pure function of the inputs.
inline MaximizeResult maximize(const ObjectiveFn& objective,
                               const std::vector<std::vector<double>>& starts,
                               const MaximizeOptions& options,
                               const GradientFn& analytic_gradient = nullptr) {
    if (starts.empty())
        throw ValidationError("maximize: needs at least one start point");
    const std::size_t n = starts.front().size();
    if ((!options.lower.empty() && options.lower.size() != n) ||
        (!options.upper.empty() && options.upper.size() != n))
        throw ValidationError("maximize: bounds length mismatch");

    const GradientFn grad = analytic_gradient
        ? analytic_gradient
        : GradientFn([&objective](std::span<const double> x) {
              return finite_difference_gradient(objective, x);
          });

    MaximizeResult result;
    for (std::size_t s = 0; s < starts.size(); ++s) {
        if (starts[s].size() != n)
            throw ValidationError("maximize: inconsistent start dimensions");
        const double f0 = objective(starts[s]);
        if (!std::isfinite(f0))
            throw NonFiniteObjective("maximize: objective not finite at start point " +
                                     std::to_string(s));
        result.start_values.push_back(f0);

        detail::AscentOutcome out = detail::ascend(objective, grad, starts[s], options);
        if (result.best_start < 0 || out.value > result.value) {
            result.value = out.value;
            result.argmax = std::move(out.x);
            result.best_start = static_cast<int>(s);
            result.gradient_converged = out.gradient_converged;
        }
    }
    return result;
}

} // namespace ndtherm
