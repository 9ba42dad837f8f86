#include "qtherm/superop.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace qtherm::superop {

Vec vec(const Mat& X) { return Eigen::Map<const Vec>(X.data(), X.size()); }

Mat unvec(const Vec& v, int d) {
  if (v.size() != static_cast<Eigen::Index>(d) * d) throw ValidationError("unvec: size mismatch");
  return Eigen::Map<const Mat>(v.data(), d, d);
}

Metric Metric::weighted(const RVec& s) {
  if (s.size() == 0 || s.minCoeff() <= 0) throw ValidationError("metric weight must be positive");
  return {Kind::Sigma, s};
}

Metric Metric::weighted_inverse(const RVec& s) {
  if (s.size() == 0 || s.minCoeff() <= 0) throw ValidationError("metric weight must be positive");
  return {Kind::SigmaInverse, s};
}

RVec Metric::weights(int d) const {
  RVec w = RVec::Ones(static_cast<Eigen::Index>(d) * d);
  if (kind == Kind::Trace) return w;
  if (sigma.size() != d) throw ValidationError("metric weight has wrong dimension");
  const double p = (kind == Kind::Sigma) ? 0.5 : -0.5;
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) w(i + d * j) = std::pow(sigma(i) * sigma(j), p);
  return w;
}

Superoperator::Superoperator(int d, Mat matrix, std::string basis)
    : d_(d), m_(std::move(matrix)), basis_(std::move(basis)) {
  const Eigen::Index n = static_cast<Eigen::Index>(d) * d;
  if (m_.rows() != n || m_.cols() != n) throw ValidationError("superoperator matrix must be d^2 x d^2");
  if (!m_.allFinite()) throw ValidationError("superoperator has non-finite entries");
}

Superoperator Superoperator::identity(int d, std::string basis) {
  const Eigen::Index n = static_cast<Eigen::Index>(d) * d;
  Superoperator s(d, Mat::Identity(n, n), std::move(basis));
  s.hermiticity_preserving = true;
  s.trace_preserving = true;
  return s;
}

Superoperator Superoperator::zero(int d, std::string basis) {
  const Eigen::Index n = static_cast<Eigen::Index>(d) * d;
  Superoperator s(d, Mat::Zero(n, n), std::move(basis));
  s.hermiticity_preserving = true;
  return s;
}

Superoperator Superoperator::sandwich(const Mat& A, const Mat& B, std::string basis) {
  const int d = static_cast<int>(A.rows());
  Superoperator s = zero(d, std::move(basis));
  s.hermiticity_preserving = false;
  add_sandwich(s.m_, A, B, 1.0);
  return s;
}

Superoperator Superoperator::commutator(const Mat& H, std::string basis) {
  const int d = static_cast<int>(H.rows());
  Superoperator s = zero(d, std::move(basis));
  Mat I = Mat::Identity(d, d);
  add_sandwich(s.m_, H, I, cplx(0, -1));
  add_sandwich(s.m_, I, H, cplx(0, 1));
  s.hermiticity_preserving = hermiticity_defect(H) < 1e-12;
  s.trace_preserving = true;
  return s;
}

Mat Superoperator::apply(const Mat& X) const {
  if (X.rows() != d_ || X.cols() != d_) throw ValidationError("operator dimension mismatch");
  return unvec(m_ * vec(X), d_);
}

void Superoperator::check_same(const Superoperator& o) const {
  if (o.d_ != d_) throw ValidationError("superoperator dimension mismatch");
  if (o.basis_ != basis_)
    throw ValidationError("basis mismatch: '" + basis_ + "' vs '" + o.basis_ + "'");
}

Superoperator Superoperator::operator+(const Superoperator& o) const {
  check_same(o);
  Superoperator s(d_, m_ + o.m_, basis_);
  s.hermiticity_preserving = hermiticity_preserving && o.hermiticity_preserving;
  s.trace_preserving = false;
  return s;
}

Superoperator Superoperator::operator-(const Superoperator& o) const {
  check_same(o);
  Superoperator s(d_, m_ - o.m_, basis_);
  s.hermiticity_preserving = hermiticity_preserving && o.hermiticity_preserving;
  return s;
}

Superoperator Superoperator::operator*(cplx c) const {
  Superoperator s(d_, m_ * c, basis_);
  s.hermiticity_preserving = hermiticity_preserving && c.imag() == 0.0;
  return s;
}

Superoperator Superoperator::after(const Superoperator& o) const {
  check_same(o);
  Superoperator s(d_, m_ * o.m_, basis_);
  s.hermiticity_preserving = hermiticity_preserving && o.hermiticity_preserving;
  return s;
}

void add_sandwich(Mat& M, const Mat& A, const Mat& B, cplx c) {
  const int d = static_cast<int>(A.rows());
  struct Entry {
    int r, s;
    cplx v;
  };
  std::vector<Entry> a, b;
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      if (A(i, k) != 0.0) a.push_back({i, k, A(i, k)});
  for (int j = 0; j < d; ++j)
    for (int l = 0; l < d; ++l)
      if (B(l, j) != 0.0) b.push_back({l, j, B(l, j)});
  // (A X B)_ij = sum_kl A_ik X_kl B_lj
  for (const Entry& eb : b) {
    const cplx cb = c * eb.v;
    const Eigen::Index col0 = static_cast<Eigen::Index>(d) * eb.r;
    const Eigen::Index row0 = static_cast<Eigen::Index>(d) * eb.s;
    for (const Entry& ea : a) M(ea.r + row0, ea.s + col0) += ea.v * cb;
  }
}

Mat weighted_adjoint(const Mat& M, const RVec& w) {
  const Eigen::Index n = M.rows();
  Mat out(n, n);
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index r = 0; r < n; ++r) out(r, c) = std::conj(M(c, r)) * (w(c) / w(r));
  return out;
}

Mat hermitian_form(const Mat& M, const RVec& w) {
  const Eigen::Index n = M.rows();
  RVec s = w.cwiseSqrt();
  Mat out(n, n);
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index r = 0; r < n; ++r) out(r, c) = M(r, c) * (s(r) / s(c));
  return out;
}

Superoperator adjoint(const Superoperator& L, const Metric& metric) {
  Superoperator s(L.dim(), weighted_adjoint(L.matrix(), metric.weights(L.dim())), L.basis());
  s.hermiticity_preserving = L.hermiticity_preserving;
  return s;
}

Split hermitian_split(const Superoperator& L, const Metric& metric) {
  Superoperator a = adjoint(L, metric);
  Superoperator h(L.dim(), 0.5 * (L.matrix() + a.matrix()), L.basis());
  Superoperator k(L.dim(), L.matrix() - h.matrix(), L.basis());
  h.hermiticity_preserving = k.hermiticity_preserving = L.hermiticity_preserving;
  return {std::move(h), std::move(k)};
}

double self_adjoint_defect(const Superoperator& L, const Metric& metric) {
  double n = L.matrix().norm();
  if (n == 0) return 0.0;
  return (L.matrix() - weighted_adjoint(L.matrix(), metric.weights(L.dim()))).norm() / n;
}

std::vector<std::vector<int>> invariant_blocks(const Mat& M) {
  const int n = static_cast<int>(M.rows());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r)
      if (M(r, c) != 0.0) {
        int a = find(r), b = find(c);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
  std::map<int, std::vector<int>> groups;
  for (int i = 0; i < n; ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<int>> out;
  out.reserve(groups.size());
  for (auto& [root, idx] : groups) out.push_back(std::move(idx));
  return out;
}

namespace {

Mat submatrix(const Mat& M, const std::vector<int>& idx) {
  const int n = static_cast<int>(idx.size());
  Mat out(n, n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) out(r, c) = M(idx[r], idx[c]);
  return out;
}

}  // namespace

std::vector<cplx> eigenvalues(const Mat& M, const RVec& w) {
  Mat H = hermitian_form(M, w);
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  std::vector<cplx> out;
  out.reserve(M.rows());
  for (const auto& idx : invariant_blocks(H)) {
    Mat B = submatrix(H, idx);
    if (hermiticity_defect(B) <= 1e-10 * scale) {
      Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (B + B.adjoint()), Eigen::EigenvaluesOnly);
      if (es.info() != Eigen::Success) throw ConvergenceError("Hermitian eigensolver failed");
      for (int i = 0; i < es.eigenvalues().size(); ++i) out.emplace_back(es.eigenvalues()(i), 0.0);
    } else {
      Eigen::ComplexEigenSolver<Mat> es(B, false);
      if (es.info() != Eigen::Success) throw ConvergenceError("eigensolver failed");
      for (int i = 0; i < es.eigenvalues().size(); ++i) out.push_back(es.eigenvalues()(i));
    }
  }
  std::stable_sort(out.begin(), out.end(), [](cplx a, cplx b) { return a.real() > b.real(); });
  return out;
}

std::vector<cplx> spectrum_of(const Superoperator& L, const Metric& metric) {
  return eigenvalues(L.matrix(), metric.weights(L.dim()));
}

double weighted_spectral_norm(const Mat& M, const RVec& w) {
  Mat H = hermitian_form(M, w);
  double best = 0;
  for (const auto& idx : invariant_blocks(H)) {
    Mat B = submatrix(H, idx);
    if (hermiticity_defect(B) <= 1e-12 * std::max(1.0, B.cwiseAbs().maxCoeff())) {
      Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (B + B.adjoint()), Eigen::EigenvaluesOnly);
      best = std::max(best, es.eigenvalues().cwiseAbs().maxCoeff());
    } else {
      Eigen::BDCSVD<Mat> svd(B);
      best = std::max(best, svd.singularValues()(0));
    }
  }
  return best;
}

NormEstimate one_one_norm_lower(const Superoperator& L, int restarts, Rng& rng) {
  const int d = L.dim();
  const Mat adj = L.matrix().adjoint();
  auto evaluate = [&](const Vec& psi, Mat& sign) {
    Mat Y = L.apply(psi * psi.adjoint());
    Y = 0.5 * (Y + Y.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(Y);
    RVec s = es.eigenvalues().unaryExpr([](double x) { return x >= 0 ? 1.0 : -1.0; });
    sign = es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
    return es.eigenvalues().cwiseAbs().sum();
  };
  NormEstimate best;
  best.converged = true;
  auto ascend = [&](Vec psi) {
    Mat sign;
    double f = evaluate(psi, sign);
    bool done = false;
    for (int it = 0; it < 500 && !done; ++it) {
      Mat G = unvec(adj * vec(sign), d);
      G = 0.5 * (G + G.adjoint());
      Eigen::SelfAdjointEigenSolver<Mat> es(G);
      Vec next = es.eigenvectors().col(d - 1);
      Mat next_sign;
      double g = evaluate(next, next_sign);
      if (g <= f + 1e-13 * std::max(1.0, f)) {
        done = true;
        if (g > f) {
          f = g;
          psi = next;
        }
      } else {
        f = g;
        psi = next;
        sign = next_sign;
      }
    }
    if (!done) best.converged = false;
    if (f > best.value) {
      best.value = f;
      best.best_state = psi;
    }
  };
  for (int i = 0; i < d; ++i) ascend(Vec::Unit(d, i));
  for (int r = 0; r < restarts; ++r) ascend(random_state(d, rng));
  return best;
}

double one_one_norm_upper(const Superoperator& L) {
  Eigen::BDCSVD<Mat> svd(L.matrix());
  return std::sqrt(static_cast<double>(L.dim())) * svd.singularValues()(0);
}

Mat choi(const Superoperator& L) {
  const int d = L.dim();
  const Eigen::Index n = static_cast<Eigen::Index>(d) * d;
  Mat J(n, n);
  // <i k| J |j l> = L(|i><j|)_{kl} = M(k + d l, i + d j)
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) J(i * d + k, j * d + l) = L.matrix()(k + d * l, i + d * j);
  return J;
}

double choi_min_eigenvalue(const Superoperator& L) {
  Mat J = choi(L);
  J = 0.5 * (J + J.adjoint());
  double best = 0;
  bool first = true;
  for (const auto& idx : invariant_blocks(J)) {
    Eigen::SelfAdjointEigenSolver<Mat> es(submatrix(J, idx), Eigen::EigenvaluesOnly);
    double m = es.eigenvalues().minCoeff();
    if (first || m < best) best = m;
    first = false;
  }
  return best;
}

double conditional_choi_min_eigenvalue(const Superoperator& L) {
  const int d = L.dim();
  const Eigen::Index n = static_cast<Eigen::Index>(d) * d;
  Mat J = choi(L);
  J = 0.5 * (J + J.adjoint());
  Vec omega = Vec::Zero(n);
  for (int i = 0; i < d; ++i) omega(i * d + i) = 1.0 / std::sqrt(static_cast<double>(d));
  const Mat Q = Mat::Identity(n, n) - omega * omega.adjoint();
  // Lift the excluded direction above the rest of the spectrum.
  const double lift = 2.0 * J.norm() + 1.0;
  Mat K = Q * J * Q + lift * omega * omega.adjoint();
  K = 0.5 * (K + K.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(K, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

namespace {

// Dormand-Prince 5(4) for v' = B v on [0, T].
Vec integrate_rk45(const Mat& B, Vec v, double T) {
  static const double c2 = 1. / 5, c3 = 3. / 10, c4 = 4. / 5, c5 = 8. / 9;
  static const double a21 = 1. / 5;
  static const double a31 = 3. / 40, a32 = 9. / 40;
  static const double a41 = 44. / 45, a42 = -56. / 15, a43 = 32. / 9;
  static const double a51 = 19372. / 6561, a52 = -25360. / 2187, a53 = 64448. / 6561, a54 = -212. / 729;
  static const double a61 = 9017. / 3168, a62 = -355. / 33, a63 = 46732. / 5247, a64 = 49. / 176,
                      a65 = -5103. / 18656;
  static const double b1 = 35. / 384, b3 = 500. / 1113, b4 = 125. / 192, b5 = -2187. / 6784, b6 = 11. / 84;
  static const double e1 = 71. / 57600, e3 = -71. / 16695, e4 = 71. / 1920, e5 = -17253. / 339200,
                      e6 = 22. / 525, e7 = -1. / 40;
  (void)c2, (void)c3, (void)c4, (void)c5;
  double t = 0, h = std::min(T, 1e-3);
  Vec k1 = B * v;
  while (t < T) {
    h = std::min(h, T - t);
    Vec k2 = B * (v + h * a21 * k1);
    Vec k3 = B * (v + h * (a31 * k1 + a32 * k2));
    Vec k4 = B * (v + h * (a41 * k1 + a42 * k2 + a43 * k3));
    Vec k5 = B * (v + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    Vec k6 = B * (v + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    Vec y = v + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    Vec k7 = B * y;
    Vec err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double tol = 1e-8 + 1e-8 * std::max(v.cwiseAbs().maxCoeff(), y.cwiseAbs().maxCoeff());
    double ratio = err.cwiseAbs().maxCoeff() / tol;
    if (ratio <= 1.0) {
      t += h;
      v = std::move(y);
      k1 = std::move(k7);
    }
    double fac = ratio > 0 ? 0.9 * std::pow(ratio, -0.2) : 5.0;
    h *= std::clamp(fac, 0.2, 5.0);
    if (h < 1e-14 * std::max(1.0, T)) throw ConvergenceError("Runge-Kutta step size underflow");
  }
  return v;
}

}  // namespace

std::vector<Mat> evolve(const Superoperator& L, const Mat& rho0, const std::vector<double>& times) {
  const int d = L.dim();
  if (d > kMaxDenseDim) throw CapacityError("dense evolution is limited to d <= 64");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (times[k] < times[k - 1]) throw ValidationError("evolution times must be ascending");
  if (!times.empty() && times.front() < 0) throw ValidationError("evolution times must be >= 0");
  const Vec v0 = vec(rho0);
  std::vector<Vec> out(times.size(), Vec::Zero(v0.size()));
  for (const auto& idx : invariant_blocks(L.matrix())) {
    const int n = static_cast<int>(idx.size());
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = v0(idx[i]);
    if (v.cwiseAbs().maxCoeff() == 0.0) continue;
    Mat B = submatrix(L.matrix(), idx);
    std::map<double, Mat> propagators;
    double t = 0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double dt = times[k] - t;
      if (dt > 0) {
        if (n <= kMaxExpmBlock) {
          auto it = propagators.find(dt);
          if (it == propagators.end()) it = propagators.emplace(dt, Mat((B * dt).exp())).first;
          v = it->second * v;
        } else {
          v = integrate_rk45(B, v, dt);
        }
      }
      t = times[k];
      for (int i = 0; i < n; ++i) out[k](idx[i]) = v(i);
    }
  }
  std::vector<Mat> traj;
  traj.reserve(times.size());
  const cplx tr0 = rho0.trace();
  for (auto& v : out) {
    Mat r = unvec(v, d);
    if (L.trace_preserving && std::abs(r.trace() - tr0) > 1e-6)
      throw ConvergenceError("trace drift above 1e-6 during evolution");
    traj.push_back(std::move(r));
  }
  return traj;
}

}  // namespace qtherm::superop
