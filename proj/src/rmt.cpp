#include "qtherm/rmt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace qtherm::rmt {

void GaussianBlockSpec::validate() const {
  if (rows < 1 || cols < 1) throw ValidationError("Gaussian block dims must be >= 1");
  if (!(variance > 0) || !std::isfinite(variance)) throw ValidationError("Gaussian variance must be > 0");
  if (hermitian && rows != cols) throw ValidationError("Hermitian Gaussian block must be square");
}

Mat sample_block(const GaussianBlockSpec& spec, Rng& rng) {
  spec.validate();
  std::normal_distribution<double> n01(0.0, 1.0);
  const double s = std::sqrt(spec.variance / 2);
  Mat G(spec.rows, spec.cols);
  // column-major fill keeps the draw order fixed
  for (int j = 0; j < spec.cols; ++j)
    for (int i = 0; i < spec.rows; ++i) {
      const double re = n01(rng);
      const double im = n01(rng);
      G(i, j) = cplx(s * re, s * im);
    }
  if (spec.hermitian) {
    Mat H = (G + G.adjoint()) / std::sqrt(2.0);
    // diagonal is sqrt(2) Re g: variance V, as for the off-diagonal entries
    for (int i = 0; i < spec.rows; ++i) H(i, i) = H(i, i).real();
    return H;
  }
  return G;
}

Mat sample_block(const GaussianBlockSpec& spec, std::uint64_t seed) {
  Rng rng = stream(seed, 0);
  return sample_block(spec, rng);
}

std::vector<EigenCluster> expected_block_map(double V, int r1, int r2, double gp, double gm) {
  if (r1 < 1 || r2 < 1) throw ValidationError("ranks must be >= 1");
  if (!(V > 0)) throw ValidationError("variance must be > 0");
  return {
      {0.0, 1},
      {-V * r1 * gm, r2 * r2 - 1},
      {-V * r2 * gp, r1 * r1 - 1},
      {-V * (r2 * gp + r1 * gm), 1},
  };
}

Mat expected_sector_map(double V, int r1, int r2, double gp, double gm) {
  const int n1 = r1 * r1, n2 = r2 * r2;
  Mat M = Mat::Zero(n1 + n2, n1 + n2);
  // X11 block
  for (int j = 0; j < n1; ++j) M(j, j) -= gp * V * r2;
  for (int i = 0; i < r1; ++i)
    for (int k = 0; k < r2; ++k) M(i + r1 * i, n1 + k + r2 * k) += gp * V;
  // X22 block
  for (int j = 0; j < n2; ++j) M(n1 + j, n1 + j) -= gm * V * r1;
  for (int i = 0; i < r2; ++i)
    for (int k = 0; k < r1; ++k) M(n1 + i + r2 * i, k + r1 * k) += gm * V;
  return M;
}

NormStats summarize(std::vector<double> samples) {
  NormStats s;
  s.trials = static_cast<int>(samples.size());
  if (samples.empty()) return s;
  s.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / s.trials;
  double var = 0;
  for (double x : samples) var += (x - s.mean) * (x - s.mean);
  if (s.trials > 1) var /= (s.trials - 1);
  s.std_error = std::sqrt(var / s.trials);
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  auto q = [&](double p) {
    const double pos = p * (sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
  };
  s.q10 = q(0.1);
  s.q50 = q(0.5);
  s.q90 = q(0.9);
  s.samples = std::move(samples);
  return s;
}

double spectral_norm(const Mat& G) {
  if (G.size() == 0) return 0.0;
  Eigen::BDCSVD<Mat> svd(G);
  return svd.singularValues()(0);
}

NormStats spectral_norm_mc(int rows, int cols, double V, int trials, std::uint64_t seed) {
  if (trials < 1) throw ValidationError("trials must be >= 1");
  std::vector<double> out;
  out.reserve(trials);
  for (int t = 0; t < trials; ++t) {
    Rng rng = stream(seed, t);
    out.push_back(spectral_norm(sample_block({rows, cols, V, false}, rng)));
  }
  return summarize(std::move(out));
}

SumKind parse_sum_kind(const std::string& s) {
  if (s == "tensor") return SumKind::Tensor;
  if (s == "product") return SumKind::Product;
  throw ValidationError("unknown sum kind '" + s + "' (expected tensor or product)");
}

double tensor_sum_norm(const std::vector<Mat>& G, const std::vector<Mat>& Gp,
                       const std::vector<double>& a, Rng& rng) {
  if (G.size() != Gp.size() || G.size() != a.size()) throw ValidationError("tensor sum: size mismatch");
  if (G.empty()) return 0.0;
  if (std::all_of(a.begin(), a.end(), [](double x) { return x == 0.0; })) return 0.0;
  const int r = static_cast<int>(G[0].rows());
  const int c = static_cast<int>(Gp[0].rows());
  std::vector<Mat> B, Bt, C, Ct;
  for (std::size_t i = 0; i < G.size(); ++i) {
    B.push_back(Gp[i].conjugate());
    Bt.push_back(Gp[i].transpose());
    C.push_back(G[i].transpose());
    Ct.push_back(G[i].conjugate());
  }
  const int in_rows = static_cast<int>(Gp[0].cols());
  const int in_cols = static_cast<int>(G[0].cols());
  const Eigen::Index n = static_cast<Eigen::Index>(in_rows) * in_cols;
  auto apply_normal = [&](const Vec& v) {
    Eigen::Map<const Mat> X(v.data(), in_rows, in_cols);
    Mat Y = Mat::Zero(c, r);
    for (std::size_t i = 0; i < B.size(); ++i)
      if (a[i] != 0.0) Y.noalias() += a[i] * (B[i] * X * C[i]);
    Mat Z = Mat::Zero(in_rows, in_cols);
    for (std::size_t i = 0; i < B.size(); ++i)
      if (a[i] != 0.0) Z.noalias() += a[i] * (Bt[i] * Y * Ct[i]);
    return Vec(Eigen::Map<Vec>(Z.data(), n));
  };
  // Lanczos with full reorthogonalization on T^dag T
  const int kmax = static_cast<int>(std::min<Eigen::Index>(n, 200));
  std::vector<Vec> Q;
  std::vector<double> alpha, beta;
  Vec q = random_state(static_cast<int>(n), rng);
  double prev = -1, top = 0;
  for (int k = 0; k < kmax; ++k) {
    Q.push_back(q);
    Vec w = apply_normal(q);
    const double al = q.dot(w).real();
    alpha.push_back(al);
    for (const Vec& u : Q) w -= u * u.dot(w);
    for (const Vec& u : Q) w -= u * u.dot(w);
    const double be = w.norm();
    const int m = static_cast<int>(alpha.size());
    RMat T = RMat::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      T(i, i) = alpha[i];
      if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<RMat> es(T, Eigen::EigenvaluesOnly);
    top = es.eigenvalues()(m - 1);
    if (be < 1e-14 * std::max(1.0, top)) break;
    if (k >= 8 && std::abs(top - prev) <= 1e-12 * top) break;
    prev = top;
    beta.push_back(be);
    q = w / be;
  }
  return std::sqrt(std::max(top, 0.0));
}

std::vector<SumRow> sum_concentration_mc(SumKind kind, const std::vector<int>& counts, int dim,
                                         double V, int trials, std::uint64_t seed, double scale) {
  if (dim < 1) throw ValidationError("dim must be >= 1");
  if (trials < 1) throw ValidationError("trials must be >= 1");
  std::vector<SumRow> rows;
  for (int cnt : counts) {
    if (cnt < 1) throw ValidationError("|a| must be >= 1");
    SumRow row;
    row.count = cnt;
    row.coefficient = scale / cnt;
    std::vector<double> norms;
    for (int t = 0; t < trials; ++t) {
      Rng rng = stream(seed, static_cast<std::uint64_t>(cnt) * 1000003ULL + t);
      std::vector<Mat> G, Gp;
      for (int i = 0; i < cnt; ++i) {
        G.push_back(sample_block({dim, dim, V, false}, rng));
        Gp.push_back(sample_block({dim, dim, V, false}, rng));
      }
      std::vector<double> a(cnt, row.coefficient);
      if (kind == SumKind::Tensor) {
        norms.push_back(tensor_sum_norm(G, Gp, a, rng));
      } else {
        Mat S = Mat::Zero(dim, dim);
        for (int i = 0; i < cnt; ++i) S += a[i] * G[i] * Gp[i];
        norms.push_back(spectral_norm(S));
      }
    }
    row.stats = summarize(std::move(norms));
    rows.push_back(std::move(row));
  }
  return rows;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("slope fit needs >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw ValidationError("log-log fit needs positive data");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace qtherm::rmt
