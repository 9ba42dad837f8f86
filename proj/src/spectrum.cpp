#include "qtherm/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <boost/math/distributions/normal.hpp>

namespace qtherm::spectrum {

void SpinChainParams::validate() const {
  if (L < 2) throw ValidationError("num_qubits must be at least 2");
  if (!std::isfinite(g) || !std::isfinite(h) || !std::isfinite(J))
    throw ValidationError("couplings must be finite");
  if (L > kMaxQubits)
    throw CapacityError("num_qubits " + std::to_string(L) + " exceeds dense limit " +
                        std::to_string(kMaxQubits));
}

RMat build_chain(const SpinChainParams& p) {
  p.validate();
  const int L = p.L;
  const long d = 1L << L;
  RMat H = RMat::Zero(d, d);
  auto bit = [L](long x, int site) { return (x >> (L - 1 - site)) & 1L; };
  const int bonds = p.periodic ? L : L - 1;
  for (long x = 0; x < d; ++x) {
    double diag = 0;
    for (int i = 0; i < L; ++i) {
      diag += p.h * (bit(x, i) ? -1.0 : 1.0);
      H(x ^ (1L << (L - 1 - i)), x) += p.g;
    }
    for (int b = 0; b < bonds; ++b) {
      int j = (b + 1) % L;
      diag += p.J * ((bit(x, b) == bit(x, j)) ? 1.0 : -1.0);
    }
    H(x, x) = diag;
  }
  return H;
}

Mat pauli_string(const std::string& s) {
  Mat out = Mat::Ones(1, 1);
  for (char c : s) {
    Mat p(2, 2);
    switch (c) {
      case 'I': p << 1, 0, 0, 1; break;
      case 'X': p << 0, 1, 1, 0; break;
      case 'Y': p << 0, cplx(0, -1), cplx(0, 1), 0; break;
      case 'Z': p << 1, 0, 0, -1; break;
      default: throw ValidationError(std::string("unknown Pauli letter '") + c + "'");
    }
    Mat next(out.rows() * 2, out.cols() * 2);
    for (int i = 0; i < out.rows(); ++i)
      for (int j = 0; j < out.cols(); ++j) next.block(2 * i, 2 * j, 2, 2) = out(i, j) * p;
    out = std::move(next);
  }
  return out;
}

std::string place_paulis(int L, const std::vector<int>& sites, const std::string& letters) {
  if (sites.size() != letters.size()) throw ValidationError("sites and letters differ in length");
  std::string s(L, 'I');
  for (std::size_t k = 0; k < sites.size(); ++k) {
    int site = ((sites[k] % L) + L) % L;
    if (s[site] != 'I') throw ValidationError("repeated site in Pauli string");
    s[site] = letters[k];
  }
  return s;
}

Mat SpectralModel::to_energy_basis(const Mat& op) const {
  if (op.rows() != dim || op.cols() != dim)
    throw ValidationError("operator dimension does not match the model");
  return eigenbasis.adjoint() * op * eigenbasis;
}

Window default_window(const RVec& sorted_eigs, double frac) {
  const int n = static_cast<int>(sorted_eigs.size());
  if (n == 0) throw ValidationError("empty spectrum");
  int drop = static_cast<int>(std::floor(frac * n));
  if (2 * drop >= n) drop = (n - 1) / 2;
  return {sorted_eigs(drop), sorted_eigs(n - 1 - drop)};
}

namespace {

SpectralModel finish(int dim, const RVec& evals, const Mat& evecs, double residual,
                     std::optional<Window> truncation) {
  SpectralModel m;
  m.dim = dim;
  m.max_residual = residual;
  m.truncation = truncation;
  std::vector<int> keep;
  for (int i = 0; i < evals.size(); ++i) {
    if (!truncation || (evals(i) >= truncation->first && evals(i) <= truncation->second))
      keep.push_back(i);
  }
  if (keep.empty()) throw ValidationError("truncation window contains no eigenvalue");
  m.eigenvalues.resize(keep.size());
  m.eigenbasis.resize(dim, keep.size());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    m.eigenvalues(k) = evals(keep[k]);
    m.eigenbasis.col(k) = evecs.col(keep[k]);
  }
  return m;
}

template <class M>
double max_residual(const M& H, const RVec& evals, const M& evecs) {
  double hnorm = H.norm();
  if (hnorm == 0) return 0.0;
  double worst = 0;
  for (int i = 0; i < evals.size(); ++i)
    worst = std::max(worst, (H * evecs.col(i) - evals(i) * evecs.col(i)).norm());
  return worst / hnorm;
}

}  // namespace

SpectralModel diagonalize(const RMat& H, std::optional<Window> truncation) {
  if (H.rows() != H.cols()) throw ValidationError("Hamiltonian must be square");
  if (H.size() && (H - H.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw ValidationError("Hamiltonian is not Hermitian");
  Eigen::SelfAdjointEigenSolver<RMat> es(H);
  if (es.info() != Eigen::Success) throw ConvergenceError("eigensolver failed");
  double res = max_residual(H, es.eigenvalues(), es.eigenvectors());
  if (res > 1e-8) throw ConvergenceError("eigen residual above 1e-8 ||H||");
  return finish(static_cast<int>(H.rows()), es.eigenvalues(), es.eigenvectors().cast<cplx>(), res,
                truncation);
}

SpectralModel diagonalize(const Mat& H, std::optional<Window> truncation) {
  if (H.rows() != H.cols()) throw ValidationError("Hamiltonian must be square");
  if (hermiticity_defect(H) > 1e-10) throw ValidationError("Hamiltonian is not Hermitian");
  if (H.size() == 0 || H.imag().cwiseAbs().maxCoeff() == 0.0)
    return diagonalize(RMat(H.real()), truncation);
  Eigen::SelfAdjointEigenSolver<Mat> es(H);
  if (es.info() != Eigen::Success) throw ConvergenceError("eigensolver failed");
  double res = max_residual(H, es.eigenvalues(), es.eigenvectors());
  if (res > 1e-8) throw ConvergenceError("eigen residual above 1e-8 ||H||");
  return finish(static_cast<int>(H.rows()), es.eigenvalues(), es.eigenvectors(), res, truncation);
}

long round_half_toward_zero(double x) {
  double fl = std::floor(x);
  double frac = x - fl;
  if (frac == 0.5) return static_cast<long>(x > 0 ? fl : fl + 1);
  return static_cast<long>(std::llround(x));
}

int RoundedSpectrum::find(long k) const {
  auto it = std::lower_bound(bins.begin(), bins.end(), k,
                             [](const Bin& b, long key) { return b.k < key; });
  if (it == bins.end() || it->k != k) return -1;
  return static_cast<int>(it - bins.begin());
}

RVec RoundedSpectrum::rounded_energies() const {
  RVec out(dim());
  for (int i = 0; i < dim(); ++i) out(i) = bins[bin_of[i]].label;
  return out;
}

RoundedSpectrum round_energies(const RVec& e, double nu0) {
  if (!(nu0 > 0)) throw ValidationError("rounding precision must be positive");
  for (int i = 1; i < e.size(); ++i)
    if (e(i) < e(i - 1)) throw ValidationError("energies must be ascending");
  RoundedSpectrum r;
  r.nu0 = nu0;
  r.energies = e;
  r.bin_of.resize(e.size());
  for (int i = 0; i < e.size(); ++i) {
    long k = round_half_toward_zero(e(i) / nu0);
    if (r.bins.empty() || r.bins.back().k != k) {
      // rounding is monotone in the energy, so bins arrive in order
      r.bins.push_back({k, k * nu0, i, i});
    }
    r.bins.back().end = i + 1;
    r.bin_of[i] = static_cast<int>(r.bins.size()) - 1;
  }
  if (e.size() > 0 && nu0 > e(e.size() - 1) - e(0)) r.single_bin_warning = true;
  return r;
}

RoundedSpectrum round_spectrum(const SpectralModel& model, double nu0) {
  return round_energies(model.eigenvalues, nu0);
}

GibbsWeights gibbs_weights(const RoundedSpectrum& r, double beta) {
  if (beta < 0) throw ValidationError("beta must be non-negative");
  GibbsWeights w;
  const int nb = r.num_bins();
  w.per_bin.resize(nb);
  double shift = nb ? r.bins.front().label : 0.0;
  for (int b = 0; b < nb; ++b)
    w.per_bin(b) = r.bins[b].rank() * std::exp(-beta * (r.bins[b].label - shift));
  w.per_bin /= w.per_bin.sum();
  w.rounded_diag.resize(r.dim());
  for (int i = 0; i < r.dim(); ++i) {
    const Bin& b = r.bins[r.bin_of[i]];
    w.rounded_diag(i) = w.per_bin(r.bin_of[i]) / b.rank();
  }
  w.exact_diag.resize(r.dim());
  double eshift = r.dim() ? r.energies(0) : 0.0;
  for (int i = 0; i < r.dim(); ++i) w.exact_diag(i) = std::exp(-beta * (r.energies(i) - eshift));
  w.exact_diag /= w.exact_diag.sum();
  return w;
}

double box_density(const RVec& e, double nu, double bandwidth) {
  if (e.size() == 0 || !(bandwidth > 0)) throw ValidationError("density needs energies and bandwidth");
  const double* b = e.data();
  const double* en = b + e.size();
  auto lo = std::lower_bound(b, en, nu - 0.5 * bandwidth);
  auto hi = std::upper_bound(b, en, nu + 0.5 * bandwidth);
  return static_cast<double>(hi - lo) / (e.size() * bandwidth);
}

double density_ratio(const RoundedSpectrum& r, double window, std::optional<Window> region) {
  if (r.dim() == 0) throw ValidationError("empty spectrum");
  const double span = r.energies(r.dim() - 1) - r.energies(0);
  if (window > span) throw ValidationError("window exceeds spectral span");
  const double bw = 3.0 * r.nu0;
  std::vector<std::pair<double, double>> pts;
  for (const Bin& b : r.bins) {
    if (b.label - 0.5 * bw < r.energies(0) || b.label + 0.5 * bw > r.energies(r.dim() - 1)) continue;
    if (region && (b.label < region->first || b.label > region->second)) continue;
    pts.emplace_back(b.label, box_density(r.energies, b.label, bw));
  }
  double R = 0;
  bool any = false;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (std::abs(pts[i].first - pts[j].first) > window + 1e-12 * r.nu0) continue;
      if (pts[j].second <= 0) continue;
      any = true;
      R = std::max(R, pts[i].second / pts[j].second);
    }
  if (!any) throw ValidationError("no bins inside the density window");
  return R;
}

double FProfile::operator()(double w) const {
  if (omega.empty()) return 1.0;
  double x = std::abs(w);
  if (x <= omega.front()) return value.front();
  if (x >= omega.back()) return value.back();
  auto it = std::upper_bound(omega.begin(), omega.end(), x);
  std::size_t j = it - omega.begin();
  double t = (x - omega[j - 1]) / (omega[j] - omega[j - 1]);
  return (1 - t) * value[j - 1] + t * value[j];
}

double ETHModel::variance(double nu1, double nu2) const {
  double D = density(0.5 * (nu1 + nu2));
  if (D <= 0) throw ValidationError("zero density between bins");
  return f2(nu1 - nu2) / (static_cast<double>(energies.size()) * D);
}

ETHModel make_eth(const RoundedSpectrum& r, double delta_rmt, FProfile f2) {
  if (!(delta_rmt > 0)) throw ValidationError("delta_rmt must be positive");
  if (f2.omega.size() != f2.value.size()) throw ValidationError("profile table is ragged");
  ETHModel m;
  m.delta_rmt = delta_rmt;
  m.f2 = std::move(f2);
  m.energies = r.energies;
  m.bandwidth = 3.0 * r.nu0;
  const double span = r.energies(r.dim() - 1) - r.energies(0);
  m.R = density_ratio(r, std::min(delta_rmt, span));
  return m;
}

RVec uniform_energies(int n, double lo, double hi) {
  RVec e(n);
  for (int i = 0; i < n; ++i) e(i) = lo + (hi - lo) * (i + 0.5) / n;
  return e;
}

RVec gaussian_quantile_energies(int n, double variance) {
  boost::math::normal_distribution<double> nd(0.0, std::sqrt(variance));
  RVec e(n);
  for (int i = 0; i < n; ++i) e(i) = boost::math::quantile(nd, (i + 0.5) / n);
  return e;
}

}  // namespace qtherm::spectrum
