#pragma once

// Special functions behind every tail probability reported by the toolkit.
//
// All functions are pure. Probabilities are returned as doubles clamped to
// [0, 1]; tails below the double range (about 1e-308) underflow to 0, use
// chi2_log_sf when the magnitude matters.

namespace fairaudit::specfun {

/// ln Gamma(x) for x > 0 (Lanczos, g = 7, 9 coefficients).
/// Throws DomainError for x <= 0 or non-finite x.
double ln_gamma(double x);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

/// Natural log of the regularized upper incomplete gamma Q(a, x).
double log_gamma_q(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

/// Upper tail of the chi-square distribution with `df` degrees of freedom.
double chi2_sf(double x, int df);

/// ln of chi2_sf, finite well past the point where chi2_sf underflows.
double chi2_log_sf(double x, int df);

/// 1 - Phi(z) for the standard normal.
double std_normal_sf(double z);

/// Asymptotic Kolmogorov distribution tail
/// Q(lambda) = 2 * sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lambda^2).
double kolmogorov_sf(double lambda);

}  // namespace fairaudit::specfun
