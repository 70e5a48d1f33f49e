#pragma once

namespace logcontrast {

/// Standard normal quantile function.
///
/// Rational approximation (Wichura-style, three regimes) with absolute
/// error well below 1e-9 over (0,1). Throws std::domain_error outside (0,1).
double norm_quantile(double u);

/// Standard normal CDF, computed from erfc.
double norm_cdf(double x);

}  // namespace logcontrast
