#pragma once

namespace piv {

// Standard normal distribution function.
double std_normal_cdf(double x) noexcept;

// Upper tail 1 - cdf(x), computed without cancellation for large x.
double std_normal_ccdf(double x) noexcept;

double std_normal_pdf(double x) noexcept;

// Inverse of std_normal_cdf. Throws Error(InvalidArgument) unless 0 < p < 1.
double std_normal_quantile(double p);

} // namespace piv
