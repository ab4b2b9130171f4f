#pragma once

namespace contagion {

/// Standard normal cumulative distribution function.
double norm_cdf(double x);

/// log(norm_cdf(x)), accurate in the far left tail where norm_cdf underflows.
double log_norm_cdf(double x);

/// Standard normal density.
double norm_pdf(double x);

}  // namespace contagion
