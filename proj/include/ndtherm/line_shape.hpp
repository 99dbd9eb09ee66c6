#pragma once

#include <cmath>

#include "ndtherm/errors.hpp"

namespace ndtherm {

/// Two Lorentzian dips below a flat baseline:
///
///   I(f) = baseline * (1 - sum_k contrast_k * (w_k/2)^2 / ((f - f_k)^2 + (w_k/2)^2))
///
/// with k in {-,+} and w_k the full width at half maximum. Contrasts and
/// widths are independent per dip; the ZFS value is D = (f_- + f_+)/2.
struct DoubleLorentzianParams {
    double baseline = 1.0;
    double contrast_minus = 0.06;
    double contrast_plus = 0.06;
    double f_minus_mhz = 2864.0;
    double f_plus_mhz = 2876.0;
    double fwhm_minus_mhz = 12.0;
    double fwhm_plus_mhz = 12.0;
};

inline void validate(const DoubleLorentzianParams& p) {
    if (!(p.baseline > 0.0) || !std::isfinite(p.baseline))
        throw ValidationError("line shape: baseline must be positive");
    if (!(p.contrast_minus > 0.0 && p.contrast_minus < 1.0) ||
        !(p.contrast_plus > 0.0 && p.contrast_plus < 1.0))
        throw ValidationError("line shape: contrasts must lie in (0, 1)");
    if (!(p.f_minus_mhz < p.f_plus_mhz))
        throw ValidationError("line shape: f_minus must be below f_plus");
    if (!(p.fwhm_minus_mhz > 0.0) || !(p.fwhm_plus_mhz > 0.0))
        throw ValidationError("line shape: widths must be positive");
    if (!std::isfinite(p.f_minus_mhz) || !std::isfinite(p.f_plus_mhz) ||
        !std::isfinite(p.fwhm_minus_mhz) || !std::isfinite(p.fwhm_plus_mhz))
        throw ValidationError("line shape: parameters must be finite");
}

inline double eval_double_lorentzian(const DoubleLorentzianParams& p, double f_mhz) {
    const double hm = 0.5 * p.fwhm_minus_mhz;
    const double hp = 0.5 * p.fwhm_plus_mhz;
    const double dm = f_mhz - p.f_minus_mhz;
    const double dp = f_mhz - p.f_plus_mhz;
    const double dip_m = p.contrast_minus * hm * hm / (dm * dm + hm * hm);
    const double dip_p = p.contrast_plus * hp * hp / (dp * dp + hp * hp);
    return p.baseline * (1.0 - dip_m - dip_p);
}

/// dI/df of the model above, used for the analytic 4-point slopes.
inline double eval_double_lorentzian_derivative(const DoubleLorentzianParams& p, double f_mhz) {
    const double hm = 0.5 * p.fwhm_minus_mhz;
    const double hp = 0.5 * p.fwhm_plus_mhz;
    const double dm = f_mhz - p.f_minus_mhz;
    const double dp = f_mhz - p.f_plus_mhz;
    const double denom_m = dm * dm + hm * hm;
    const double denom_p = dp * dp + hp * hp;
    const double ddip_m = p.contrast_minus * hm * hm * (-2.0 * dm) / (denom_m * denom_m);
    const double ddip_p = p.contrast_plus * hp * hp * (-2.0 * dp) / (denom_p * denom_p);
    return p.baseline * (-ddip_m - ddip_p);
}

inline double zfs_from_params(const DoubleLorentzianParams& p) {
    return 0.5 * (p.f_minus_mhz + p.f_plus_mhz);
}

/// Rigid translation of both dip centers by delta_d_mhz; D moves by the same amount.
inline DoubleLorentzianParams shifted_by_zfs(DoubleLorentzianParams p, double delta_d_mhz) {
    p.f_minus_mhz += delta_d_mhz;
    p.f_plus_mhz += delta_d_mhz;
    return p;
}

} // namespace ndtherm
