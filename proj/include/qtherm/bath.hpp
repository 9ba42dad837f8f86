#pragma once

#include <limits>

#include "qtherm/common.hpp"

namespace qtherm::bath {

struct BathProfile {
  double beta = 1.0;
  double delta = 1.0;  // bath width Delta_B

  void validate() const;
  // Peak position beta Delta^2 / 2 of gamma.
  double shift() const { return 0.5 * beta * delta * delta; }
};

// Two-point function in its printed closed form:
// exp(i beta D^2 t / 2) exp(-D^2 t^2 / 2) + c.c.  Real valued.
double correlator(const BathProfile& b, double t);

// Two-point function whose Fourier transform is gamma:
// C(s) = (1 / 2 pi) exp(-i beta D^2 s / 2) exp(-D^2 s^2 / 2), so that
// gamma(w) = int e^{i w s} C(s) ds and C(-s) = conj C(s).
cplx correlator_gamma(const BathProfile& b, double s);

// Gaussian spectral function; satisfies gamma(-w) = exp(-beta w) gamma(w).
double gamma(const BathProfile& b, double w);

// Half-line transform int_0^{8/D} e^{i w s} C(s) ds by adaptive quadrature.
// Throws ConvergenceError if the quadrature error exceeds `tol`.
cplx gamma_big(const BathProfile& b, double w, double tol = 1e-10);

// Lamb-shift coefficient (Gamma(w) - conj Gamma(w')) / 2i.
cplx lamb_coefficient(const BathProfile& b, double w, double wp);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// int_0^T |correlator(t)| dt.  T = kInfinity integrates to a cutoff whose tail
// is below 1e-11.
double correlator_l1(const BathProfile& b, double T);

}  // namespace qtherm::bath
