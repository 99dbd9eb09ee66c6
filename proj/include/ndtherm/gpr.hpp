#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ndtherm/errors.hpp"
#include "ndtherm/linalg.hpp"
#include "ndtherm/optimize.hpp"
#include "ndtherm/spectrum.hpp"

namespace ndtherm {

// Log-domain kernel hyperparameters, so the positive quantities are
// unconstrained during optimization.
struct GprHyperparams {
    double log_lengthscale = 0.0;
    double log_signal_variance = 0.0;
    double log_noise_variance = -3.0;
};

inline void validate(const GprHyperparams& h) {
    if (!std::isfinite(h.log_lengthscale) || !std::isfinite(h.log_signal_variance) ||
        !std::isfinite(h.log_noise_variance))
        throw ValidationError("gpr: hyperparameters must be finite");
}

// Numerical floor added to the noise variance everywhere the kernel matrix
// diagonal is formed; keeps near-duplicate training spectra factorable.
inline constexpr double kGprNoiseFloor = 1e-10;

/// Squared-exponential kernel sf2 * exp(-|x1 - x2|^2 / (2 l^2)).
inline double kernel(std::span<const double> x1, std::span<const double> x2,
                     const GprHyperparams& h) {
    if (x1.size() != x2.size())
        throw ValidationError("kernel: dimension mismatch");
    double sq = 0.0;
    for (std::size_t i = 0; i < x1.size(); ++i) {
        const double d = x1[i] - x2[i];
        sq += d * d;
    }
    const double ell = std::exp(h.log_lengthscale);
    return std::exp(h.log_signal_variance) * std::exp(-0.5 * sq / (ell * ell));
}

/// Trained exact-GPR regressor from intensity vectors to temperature.
/// Inputs are z-scored per frequency dimension and targets are z-scored;
/// the Cholesky factor and weight vector w = (K + sn2 I)^{-1} y are stored
/// in standardized units.
struct GprModel {
    std::size_t n = 0;  // training spectra
    std::size_t d = 0;  // frequency dimensions
    std::vector<double> x;  // n x d row-major, standardized
    std::vector<double> y;  // standardized targets
    std::vector<double> x_mean, x_std;  // per-dimension input standardization
    double y_mean = 0.0, y_std = 1.0;
    GprHyperparams hyper;
    CholeskyFactor chol;
    std::vector<double> weights;
    std::vector<double> grid_mhz;

    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(x).subspan(i * d, d);
    }
};

struct Prediction {
    double mean_k = 0.0;
    double std_k = 0.0;
};

namespace detail {

inline void check_common_grid(const std::vector<Spectrum>& spectra) {
    for (std::size_t i = 1; i < spectra.size(); ++i)
        if (spectra[i].frequencies_mhz != spectra[0].frequencies_mhz)
            throw GridMismatch("gpr: training spectra are not on one frequency grid");
}

// K(X,X) + (sn2 + floor) I in standardized units.
inline SymMatrix kernel_matrix(const GprModel& m, const GprHyperparams& h) {
    SymMatrix k(m.n);
    const double noise = std::exp(h.log_noise_variance) + kGprNoiseFloor;
    for (std::size_t i = 0; i < m.n; ++i) {
        for (std::size_t j = i; j < m.n; ++j) {
            const double v = kernel(m.row(i), m.row(j), h);
            k.set(i, j, i == j ? v + noise : v);
        }
    }
    return k;
}

// log p(y | X, h) = -1/2 y^T a - 1/2 log|K_n| - n/2 log(2 pi)
inline double log_marginal_likelihood(const GprModel& m, const GprHyperparams& h) {
    const SymMatrix k = kernel_matrix(m, h);
    const CholeskyFactor f = cholesky(k, 1e-6 * std::abs(k.mean_diagonal()));
    const std::vector<double> a = solve_chol(f, m.y);
    constexpr double log_2pi = 1.8378770664093454836;
    return -0.5 * dot(m.y, a) - 0.5 * log_det(f) -
           0.5 * static_cast<double>(m.n) * log_2pi;
}

inline void factorize(GprModel& m) {
    const SymMatrix k = kernel_matrix(m, m.hyper);
    m.chol = cholesky(k, 1e-6 * std::abs(k.mean_diagonal()));
    m.weights = solve_chol(m.chol, m.y);
}

inline GprModel standardize(const std::vector<Spectrum>& spectra) {
    if (spectra.size() < 2)
        throw ValidationError("gpr: needs at least 2 training spectra");
    for (const Spectrum& s : spectra) {
        validate(s);
        if (!s.true_temperature_k)
            throw ValidationError("gpr: training spectra must carry temperature labels");
    }
    check_common_grid(spectra);

    GprModel m;
    m.n = spectra.size();
    m.d = spectra[0].size();
    m.grid_mhz = spectra[0].frequencies_mhz;

    m.x_mean.assign(m.d, 0.0);
    m.x_std.assign(m.d, 0.0);
    for (const Spectrum& s : spectra)
        for (std::size_t j = 0; j < m.d; ++j)
            m.x_mean[j] += s.intensities[j];
    for (double& v : m.x_mean)
        v /= static_cast<double>(m.n);
    for (const Spectrum& s : spectra)
        for (std::size_t j = 0; j < m.d; ++j) {
            const double c = s.intensities[j] - m.x_mean[j];
            m.x_std[j] += c * c;
        }
    for (double& v : m.x_std) {
        v = std::sqrt(v / static_cast<double>(m.n));
        if (v == 0.0)
            v = 1.0;  // constant dimension carries no information
    }

    double t_mean = 0.0, t_var = 0.0;
    for (const Spectrum& s : spectra)
        t_mean += *s.true_temperature_k;
    t_mean /= static_cast<double>(m.n);
    for (const Spectrum& s : spectra) {
        const double c = *s.true_temperature_k - t_mean;
        t_var += c * c;
    }
    t_var /= static_cast<double>(m.n);
    if (t_var == 0.0)
        throw DegenerateTargets("gpr: all training temperatures are equal");
    m.y_mean = t_mean;
    m.y_std = std::sqrt(t_var);

    m.x.resize(m.n * m.d);
    m.y.resize(m.n);
    for (std::size_t i = 0; i < m.n; ++i) {
        for (std::size_t j = 0; j < m.d; ++j)
            m.x[i * m.d + j] = (spectra[i].intensities[j] - m.x_mean[j]) / m.x_std[j];
        m.y[i] = (*spectra[i].true_temperature_k - m.y_mean) / m.y_std;
    }
    return m;
}

} // namespace detail

/// Build a model at fixed hyperparameters (no marginal-likelihood search).
/// This is also the rebuild path used when loading a saved model.
inline GprModel make_model(const std::vector<Spectrum>& spectra, const GprHyperparams& h) {
    validate(h);
    GprModel m = detail::standardize(spectra);
    m.hyper = h;
    detail::factorize(m);
    return m;
}

/// Train by maximizing the log marginal likelihood over the three
/// log-hyperparameters with a deterministic 3x3x3 multi-start grid
/// (lengthscales scaled by sqrt(d)), each coordinate boxed to [-12, 12].
/// An optional h0 joins the start list.
inline GprModel train(const std::vector<Spectrum>& spectra,
                      std::optional<GprHyperparams> h0 = {}) {
    GprModel m = detail::standardize(spectra);

    const double root_d = std::sqrt(static_cast<double>(m.d));
    const double log_ell_mid = std::log(root_d);
    std::vector<std::vector<double>> starts;
    for (const double dl : {std::log(0.5), 0.0, std::log(2.0)})
        for (const double lsf : {-2.0, 0.0, 2.0})
            for (const double lsn : {-6.0, -3.0, -1.0})
                starts.push_back({log_ell_mid + dl, lsf, lsn});
    if (h0) {
        validate(*h0);
        starts.push_back({h0->log_lengthscale, h0->log_signal_variance, h0->log_noise_variance});
    }

    MaximizeOptions opts;
    opts.lower = {-12.0, -12.0, -12.0};
    opts.upper = {12.0, 12.0, 12.0};
    opts.grad_tol = 1e-5;
    opts.max_iterations = 500;

    const ObjectiveFn objective = [&m](std::span<const double> v) {
        const GprHyperparams h{v[0], v[1], v[2]};
        try {
            return detail::log_marginal_likelihood(m, h);
        } catch (const NotPositiveDefinite&) {
            return -std::numeric_limits<double>::infinity();
        }
    };
    const MaximizeResult r = maximize(objective, starts, opts);

    m.hyper = GprHyperparams{r.argmax[0], r.argmax[1], r.argmax[2]};
    detail::factorize(m);
    return m;
}

/// Subsample every spectrum to n_p equally spaced points, then train.
inline GprModel train_subsampled(const std::vector<Spectrum>& spectra, int n_p,
                                 std::optional<GprHyperparams> h0 = {}) {
    std::vector<Spectrum> reduced;
    reduced.reserve(spectra.size());
    for (const Spectrum& s : spectra)
        reduced.push_back(subsample_equally_spaced(s, n_p));
    return train(reduced, h0);
}

/// Keep only the listed frequencies (nearest grid points), then train.
inline GprModel train_subsampled(const std::vector<Spectrum>& spectra,
                                 std::span<const double> frequencies_mhz,
                                 std::optional<GprHyperparams> h0 = {}) {
    std::vector<Spectrum> reduced;
    reduced.reserve(spectra.size());
    for (const Spectrum& s : spectra)
        reduced.push_back(select_frequencies(s, frequencies_mhz));
    return train(reduced, h0);
}

/// Predictive mean and standard deviation in kelvin. The variance is that
/// of a new observation, (sf2 + sn2) - k*^T (K + sn2 I)^{-1} k*, clamped
/// at zero; a pre-clamp value below -1e-8 trips an internal check.
inline Prediction predict(const GprModel& m, const Spectrum& s) {
    validate(s);
    if (s.frequencies_mhz != m.grid_mhz)
        throw GridMismatch("predict: spectrum grid differs from the training grid");

    std::vector<double> xs(m.d);
    for (std::size_t j = 0; j < m.d; ++j)
        xs[j] = (s.intensities[j] - m.x_mean[j]) / m.x_std[j];

    std::vector<double> kstar(m.n);
    for (std::size_t i = 0; i < m.n; ++i)
        kstar[i] = kernel(m.row(i), xs, m.hyper);

    const double mean_std_units = dot(kstar, m.weights);

    std::vector<double> v = kstar;
    solve_lower_inplace(m.chol, v);
    const double noise = std::exp(m.hyper.log_noise_variance) + kGprNoiseFloor;
    const double k_self = kernel(xs, xs, m.hyper) + noise;
    double var_std_units = k_self - dot(v, v);
    if (var_std_units < -1e-8)
        throw InternalError("predict: predictive variance " + std::to_string(var_std_units) +
                            " below the consistency floor");
    var_std_units = std::max(var_std_units, 0.0);

    Prediction p;
    p.mean_k = m.y_mean + m.y_std * mean_std_units;
    p.std_k = m.y_std * std::sqrt(var_std_units);
    return p;
}

} // namespace ndtherm
