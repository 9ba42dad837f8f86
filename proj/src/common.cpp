#include "qtherm/common.hpp"

#include <Eigen/Eigenvalues>

namespace qtherm {

Vec random_state(int d, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec v(d);
  for (int i = 0; i < d; ++i) v(i) = cplx(n(rng), n(rng));
  return v / v.norm();
}

Mat random_density(int d, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat g(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) g(i, j) = cplx(n(rng), n(rng));
  Mat rho = g * g.adjoint();
  return rho / rho.trace().real();
}

double trace_norm_hermitian(const Mat& X) {
  Mat h = 0.5 * (X + X.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

double hermiticity_defect(const Mat& A) {
  if (A.size() == 0) return 0.0;
  return (A - A.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace qtherm
