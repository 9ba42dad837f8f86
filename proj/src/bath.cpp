#include "qtherm/bath.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace qtherm::bath {

using boost::math::quadrature::gauss_kronrod;

void BathProfile::validate() const {
  if (!(beta >= 0) || !std::isfinite(beta)) throw ValidationError("beta must be finite and >= 0");
  if (!(delta > 0) || !std::isfinite(delta)) throw ValidationError("bath width must be positive");
}

double correlator(const BathProfile& b, double t) {
  const double d2 = b.delta * b.delta;
  return 2.0 * std::cos(0.5 * b.beta * d2 * t) * std::exp(-0.5 * d2 * t * t);
}

cplx correlator_gamma(const BathProfile& b, double s) {
  const double d2 = b.delta * b.delta;
  return std::polar(std::exp(-0.5 * d2 * s * s) / (2 * std::numbers::pi), -b.shift() * s);
}

double gamma(const BathProfile& b, double w) {
  const double x = w - b.shift();
  return std::exp(-x * x / (2 * b.delta * b.delta)) / std::sqrt(2 * std::numbers::pi * b.delta * b.delta);
}

cplx gamma_big(const BathProfile& b, double w, double tol) {
  const double upper = 8.0 / b.delta;
  const double d2 = b.delta * b.delta;
  const double nu = w - b.shift();
  auto env = [d2](double s) { return std::exp(-0.5 * d2 * s * s) / (2 * std::numbers::pi); };
  double err_re = 0, err_im = 0;
  double re = gauss_kronrod<double, 61>::integrate(
      [&](double s) { return env(s) * std::cos(nu * s); }, 0.0, upper, 15, 1e-13, &err_re);
  double im = gauss_kronrod<double, 61>::integrate(
      [&](double s) { return env(s) * std::sin(nu * s); }, 0.0, upper, 15, 1e-13, &err_im);
  double achieved = std::max(err_re, err_im);
  if (achieved > tol)
    throw ConvergenceError("Gamma quadrature reached only " + std::to_string(achieved));
  return {re, im};
}

cplx lamb_coefficient(const BathProfile& b, double w, double wp) {
  return (gamma_big(b, w) - std::conj(gamma_big(b, wp))) / cplx(0, 2);
}

double correlator_l1(const BathProfile& b, double T) {
  if (T < 0) throw ValidationError("integration limit must be non-negative");
  const double d = b.delta;
  // tail of 2 exp(-D^2 t^2/2) beyond tc is below 2 exp(-D^2 tc^2 / 2) / (D^2 tc)
  double tc = 1.0 / d;
  while (2 * std::exp(-0.5 * d * d * tc * tc) / (d * d * tc) > 1e-11) tc *= 1.1;
  const double upper = std::min(T, tc);
  if (upper == 0) return 0.0;
  const double w0 = b.shift();  // oscillation frequency beta D^2 / 2
  auto f = [&](double t) { return std::abs(correlator(b, t)); };
  // split at zeros of the cosine so every panel is smooth
  double total = 0, a = 0;
  if (w0 > 0) {
    for (int k = 0;; ++k) {
      double z = (std::numbers::pi * (k + 0.5)) / w0;
      if (z >= upper) break;
      total += gauss_kronrod<double, 61>::integrate(f, a, z, 15, 1e-14);
      a = z;
    }
  }
  total += gauss_kronrod<double, 61>::integrate(f, a, upper, 15, 1e-14);
  return total;
}

}  // namespace qtherm::bath
