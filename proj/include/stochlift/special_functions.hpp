#pragma once

// Scalar special functions used by the Gaussian noise bounds and the rate formulas.
// All functions throw std::domain_error outside their documented domain.

namespace stochlift {

/// ln Γ(a) for a > 0.
double ln_gamma(double a);

/// Regularized upper incomplete gamma function Q(a, z) = Γ(a, z) / Γ(a), for a > 0, z >= 0.
///
/// Evaluated with the lower series P(a, z) for z < a + 1 and a modified Lentz continued
/// fraction otherwise, so both branches converge geometrically.
double reg_gamma_q(double a, double z);

/// Regularized lower incomplete gamma function P(a, z) = 1 - Q(a, z).
double reg_gamma_p(double a, double z);

/// Principal branch W0 of the Lambert W function, the solution w >= -1 of w e^w = z
/// for z >= -1/e. Halley iteration from a piecewise initial guess, at most 50 steps.
double lambert_w0(double z);

}  // namespace stochlift
