#pragma once

namespace fimci {

/// Standard normal density.
double normal_pdf(double x);

/// Standard normal CDF, absolute error below 1e-15 over the full range.
/// Rational approximation after Cody (1969); does not depend on libm's erfc.
double normal_cdf(double x);

/// Complementary error function backing normal_cdf; exposed for tests.
double erfc_cody(double x);

/// Inverse of normal_cdf for p in (0,1). Rational initial estimate (Acklam)
/// polished by two Halley steps on the CDF; absolute error below 1e-13.
/// Throws std::domain_error outside (0,1).
double normal_quantile(double p);

}  // namespace fimci
