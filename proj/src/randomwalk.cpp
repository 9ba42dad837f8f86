#include "qtherm/randomwalk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "qtherm/rmt.hpp"

namespace qtherm::randomwalk {

void SpectralChain::validate() const {
  const int n = size();
  if (kernel.rows() != n || kernel.cols() != n) throw ValidationError("kernel shape does not match states");
  if (pi.size() != n) throw ValidationError("stationary vector has wrong length");
  if (row_sum_defect(*this) > 1e-12) throw ValidationError("kernel rows do not sum correctly");
  if (pi.minCoeff() < 0 || std::abs(pi.sum() - 1.0) > 1e-12)
    throw ValidationError("stationary vector is not a probability vector");
}

double row_sum_defect(const SpectralChain& c) {
  const double target = c.discrete ? 1.0 : 0.0;
  double worst = 0;
  for (int i = 0; i < c.size(); ++i) worst = std::max(worst, std::abs(c.kernel.row(i).sum() - target));
  return worst;
}

double reversibility_residual(const SpectralChain& c) {
  double worst = 0, scale = 0;
  for (int i = 0; i < c.size(); ++i)
    for (int j = 0; j < c.size(); ++j) {
      if (i == j) continue;
      const double f = c.pi(i) * c.kernel(i, j);
      scale = std::max(scale, std::abs(f));
      worst = std::max(worst, std::abs(f - c.pi(j) * c.kernel(j, i)));
    }
  return scale > 0 ? worst / scale : 0.0;
}

RVec stationary(const SpectralChain& c) {
  const int n = c.size();
  RMat A = c.kernel.transpose();
  if (c.discrete) A -= RMat::Identity(n, n);
  A.row(n - 1).setOnes();
  RVec b = RVec::Zero(n);
  b(n - 1) = 1.0;
  RVec pi = A.colPivHouseholderQr().solve(b);
  return pi / pi.sum();
}

namespace {

void fold_diagonal(RMat& K, bool discrete) {
  for (int i = 0; i < K.rows(); ++i) {
    double off = 0;
    for (int j = 0; j < K.cols(); ++j)
      if (j != i) off += K(i, j);
    K(i, i) = discrete ? 1.0 - off : -off;
  }
}

RVec bin_labels(const spectrum::RoundedSpectrum& r) {
  RVec l(r.num_bins());
  for (int i = 0; i < r.num_bins(); ++i) l(i) = r.bins[i].label;
  return l;
}

}  // namespace

SpectralChain eth_generator(const spectrum::RoundedSpectrum& r, const spectrum::ETHModel& eth,
                            const bath::BathProfile& b, int count) {
  const int n = r.num_bins();
  if (n < 2) throw ValidationError("generator chain needs at least two bins");
  if (count < 1) throw ValidationError("|a| must be >= 1");
  b.validate();
  SpectralChain c;
  c.labels = bin_labels(r);
  c.discrete = false;
  c.step = eth.delta_rmt;
  c.kernel = RMat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double w = c.labels(i) - c.labels(j);
      if (std::abs(w) > eth.delta_rmt + 1e-12 * r.nu0) continue;
      const double V = eth.variance(c.labels(i), c.labels(j));
      c.kernel(i, j) = bath::gamma(b, w) * count * r.bins[j].rank() * V;
    }
  fold_diagonal(c.kernel, false);
  c.pi = spectrum::gibbs_weights(r, b.beta).per_bin;
  c.reversible = reversibility_residual(c) <= 1e-10;
  return c;
}

SpectralChain metropolis_chain(const spectrum::RoundedSpectrum& r, const spectrum::ETHModel& eth,
                               double beta, double delta_rmt, bool leveling) {
  const int n = r.num_bins();
  if (!(delta_rmt >= r.nu0)) throw ValidationError("Delta_RMT must span at least one bin");
  SpectralChain c;
  c.labels = bin_labels(r);
  c.step = delta_rmt;
  RMat W = RMat::Zero(n, n);
  RVec proposal = RVec::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double w = c.labels(j) - c.labels(i);
      if (std::abs(w) > delta_rmt + 1e-12 * r.nu0) continue;
      const double base = r.bins[j].rank() * eth.variance(c.labels(i), c.labels(j));
      proposal(i) += base;
      W(i, j) = base * std::min(1.0, std::exp(-beta * w));
    }
  const double scale = proposal.maxCoeff();
  if (!(scale > 0)) throw ValidationError("window contains no transitions");
  W /= scale;
  RVec pi = spectrum::gibbs_weights(r, beta).per_bin;
  if (leveling) {
    RVec move = W.rowwise().sum();
    const double rmin = move.minCoeff();
    if (!(rmin > 0)) throw ValidationError("a bin has no allowed move; leveling undefined");
    for (int i = 0; i < n; ++i) {
      const double p = rmin / move(i);
      W.row(i) *= p;
      pi(i) /= p;
    }
    pi /= pi.sum();
  }
  fold_diagonal(W, true);
  c.kernel = std::move(W);
  c.pi = pi;
  c.reversible = reversibility_residual(c) <= 1e-10;
  return c;
}

SpectralChain eigenstate_metropolis_chain(const RVec& energies, const std::vector<Mat>& ops,
                                          const std::vector<double>& p, double beta) {
  const int n = static_cast<int>(energies.size());
  if (ops.size() != p.size()) throw ValidationError("one probability per interaction required");
  SpectralChain c;
  c.labels = energies;
  c.kernel = RMat::Zero(n, n);
  for (std::size_t a = 0; a < ops.size(); ++a) {
    if (ops[a].rows() != n) throw ValidationError("interaction size does not match energies");
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        c.kernel(i, j) += p[a] * std::norm(ops[a](j, i)) *
                          std::min(1.0, std::exp(-beta * (energies(j) - energies(i))));
      }
  }
  fold_diagonal(c.kernel, true);
  RVec w = (-beta * (energies.array() - energies.minCoeff())).exp();
  c.pi = w / w.sum();
  c.reversible = reversibility_residual(c) <= 1e-10;
  return c;
}

SpectralChain uniformize(const SpectralChain& g) {
  if (g.discrete) throw ValidationError("uniformize expects a generator");
  SpectralChain c = g;
  c.discrete = true;
  const double q = (-g.kernel.diagonal()).maxCoeff();
  const int n = g.size();
  c.kernel = RMat::Identity(n, n);
  if (q > 0) c.kernel += g.kernel / q;
  return c;
}

Cut conductance(const SpectralChain& c, CutFamily family) {
  if (!c.discrete) throw ValidationError("conductance is defined here for discrete chains");
  const int n = c.size();
  if (n < 2) throw ValidationError("conductance needs at least two states");
  RMat F(n, n);
  for (int i = 0; i < n; ++i) F.row(i) = c.pi(i) * c.kernel.row(i);
  const double half = 0.5 + 1e-14;
  Cut best;
  best.phi = std::numeric_limits<double>::infinity();

  if (family == CutFamily::Exhaustive) {
    if (n > kMaxExhaustiveStates)
      throw CapacityError("exhaustive cuts limited to " + std::to_string(kMaxExhaustiveStates) + " states");
    // Gray-code walk over subsets; Q and pi(A) updated in O(n) per step
    std::vector<char> in(n, 0);
    double piA = 0, Q = 0;
    const unsigned long total = 1UL << n;
    unsigned long best_mask = 0;
    unsigned long mask = 0;
    for (unsigned long g = 1; g < total; ++g) {
      const int v = __builtin_ctzl(g);
      double to_out = 0, from_in = 0;
      for (int j = 0; j < n; ++j) {
        if (j == v) continue;
        if (in[j]) {
          from_in += F(j, v);
          to_out += F(v, j);
        }
      }
      const double out_all = c.pi(v) - F(v, v);  // total flow out of v to others
      if (!in[v]) {
        // add v: its flow to the outside joins Q, flow from A into v leaves Q
        Q += (out_all - to_out) - from_in;
        piA += c.pi(v);
        in[v] = 1;
      } else {
        Q -= (out_all - to_out) - from_in;
        piA -= c.pi(v);
        in[v] = 0;
      }
      mask ^= (1UL << v);
      if (piA <= half && piA > 0) {
        const double phi = Q / piA;
        if (phi < best.phi) {
          best.phi = phi;
          best_mask = mask;
        }
      }
    }
    for (int i = 0; i < n; ++i)
      if (best_mask >> i & 1UL) best.set.push_back(i);
    return best;
  }

  // intervals [a, b): Q = sum_{i in A} (pi_i - sum_{j in A} F_ij)
  RMat S = RMat::Zero(n + 1, n + 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) S(i + 1, j + 1) = F(i, j) + S(i, j + 1) + S(i + 1, j) - S(i, j);
  RVec P = RVec::Zero(n + 1);
  for (int i = 0; i < n; ++i) P(i + 1) = P(i) + c.pi(i);
  int ba = 0, bb = 0;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b <= n; ++b) {
      const double piA = P(b) - P(a);
      if (piA > half || piA <= 0) continue;
      const double inner = S(b, b) - S(a, b) - S(b, a) + S(a, a);
      const double phi = (piA - inner) / piA;
      if (phi < best.phi) {
        best.phi = phi;
        ba = a;
        bb = b;
      }
    }
  for (int i = ba; i < bb; ++i) best.set.push_back(i);
  return best;
}

double second_eigenvalue(const SpectralChain& c) {
  if (!c.discrete) throw ValidationError("second_eigenvalue expects a discrete chain");
  const int n = c.size();
  if (n < 2) return 0.0;
  RVec s = c.pi.array().sqrt();
  RMat Sym(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Sym(i, j) = s(i) * c.kernel(i, j) / s(j);
  Sym = 0.5 * (Sym + Sym.transpose());
  Eigen::SelfAdjointEigenSolver<RMat> es(Sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(n - 2);
}

CheegerResult cheeger_check(const SpectralChain& c) {
  if (!c.discrete) throw ValidationError("Cheeger bounds are stated for discrete chains");
  if (reversibility_residual(c) > 1e-10) throw ValidationError("chain is not reversible; bound not guaranteed");
  CheegerResult r;
  r.family = c.size() <= kMaxExhaustiveStates ? CutFamily::Exhaustive : CutFamily::Contiguous;
  r.lambda2 = second_eigenvalue(c);
  r.phi = conductance(c, r.family).phi;
  r.lower = 1.0 - 2.0 * r.phi;
  r.upper = 1.0 - 0.5 * r.phi * r.phi;
  const double tol = 1e-12;
  r.holds = r.lower <= r.lambda2 + tol && r.lambda2 <= r.upper + tol;
  return r;
}

void DensitySpec::validate() const {
  if (kind == "truncated-gaussian" || kind == "bimodal") {
    if (!(variance > 0)) throw ValidationError("density variance must be > 0");
    if (!(half_width > 0)) throw ValidationError("half_width must be > 0");
    if (!(nu0 > 0) || nu0 > half_width) throw ValidationError("nu0 must be in (0, half_width]");
    if (kind == "bimodal" && !(separation >= 0)) throw ValidationError("separation must be >= 0");
    return;
  }
  if (kind == "table") {
    if (energies.size() < 2 || energies.size() != density.size())
      throw ValidationError("density table needs matching energies and density, >= 2 rows");
    if (!(nu0 > 0)) throw ValidationError("nu0 must be > 0");
    for (std::size_t i = 1; i < energies.size(); ++i)
      if (!(energies[i] > energies[i - 1])) throw ValidationError("table energies must increase");
    for (double d : density)
      if (d < 0) throw ValidationError("density must be >= 0");
    return;
  }
  throw ValidationError("unknown density kind '" + kind + "'");
}

BinnedGibbs binned_gibbs(const DensitySpec& spec, double beta) {
  spec.validate();
  BinnedGibbs g;
  g.nu0 = spec.nu0;
  std::vector<double> labels, weights;
  if (spec.kind == "table") {
    const long k0 = static_cast<long>(std::ceil(spec.energies.front() / spec.nu0 - 1e-9));
    const long k1 = static_cast<long>(std::floor(spec.energies.back() / spec.nu0 + 1e-9));
    for (long k = k0; k <= k1; ++k) {
      const double nu = k * spec.nu0;
      auto it = std::upper_bound(spec.energies.begin(), spec.energies.end(), nu);
      std::size_t j = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - spec.energies.begin(), 1),
                                            spec.energies.size() - 1);
      const double t = (nu - spec.energies[j - 1]) / (spec.energies[j] - spec.energies[j - 1]);
      const double d = (1 - t) * spec.density[j - 1] + t * spec.density[j];
      if (d <= 0) continue;
      labels.push_back(nu);
      weights.push_back(std::log(d) - beta * nu);
    }
  } else {
    const long K = static_cast<long>(std::floor(spec.half_width / spec.nu0 + 1e-9));
    const double c = 0.5 * spec.separation;
    for (long k = -K; k <= K; ++k) {
      const double nu = k * spec.nu0;
      double logd;
      if (spec.kind == "truncated-gaussian") {
        logd = -nu * nu / (2 * spec.variance);
      } else {
        const double a = -(nu - c) * (nu - c) / (2 * spec.variance);
        const double b = -(nu + c) * (nu + c) / (2 * spec.variance);
        const double m = std::max(a, b);
        logd = m + std::log(std::exp(a - m) + std::exp(b - m));
      }
      labels.push_back(nu);
      weights.push_back(logd - beta * nu);
    }
  }
  if (labels.size() < 2) throw ValidationError("density has fewer than two occupied bins");
  const double mx = *std::max_element(weights.begin(), weights.end());
  g.labels = Eigen::Map<RVec>(labels.data(), labels.size());
  g.pi.resize(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) g.pi(i) = std::exp(weights[i] - mx);
  g.pi /= g.pi.sum();
  return g;
}

BinnedGibbs binned_gibbs(const spectrum::RoundedSpectrum& r, double beta) {
  BinnedGibbs g;
  g.nu0 = r.nu0;
  g.labels = bin_labels(r);
  g.pi = spectrum::gibbs_weights(r, beta).per_bin;
  return g;
}

SpectralChain phi_walk(const BinnedGibbs& g, double delta_rmt) {
  const int n = static_cast<int>(g.labels.size());
  if (n < 2) throw ValidationError("walk needs at least two bins");
  const long K = static_cast<long>(std::floor(delta_rmt / g.nu0 + 1e-9));
  if (K < 1) throw ValidationError("Delta_RMT must span at least one bin");
  const double m = 2.0 * K;
  SpectralChain c;
  c.labels = g.labels;
  c.pi = g.pi;
  c.step = delta_rmt;
  c.kernel = RMat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double dk = std::abs(g.labels(j) - g.labels(i)) / g.nu0;
      if (dk > K + 1e-9) continue;
      c.kernel(i, j) = g.pi(j) / (g.pi(i) + g.pi(j)) / m;
    }
  fold_diagonal(c.kernel, true);
  c.reversible = reversibility_residual(c) <= 1e-10;
  return c;
}

ScalingResult lambda_rw_scaling(const BinnedGibbs& g, const std::vector<double>& grid) {
  if (grid.size() < 4) throw ValidationError("scaling fit needs at least 4 Delta_RMT values");
  ScalingResult res;
  std::vector<double> xs, ys;
  for (double d : grid) {
    const SpectralChain c = phi_walk(g, d);
    ScalingRow row;
    row.delta_rmt = d;
    row.lambda2 = second_eigenvalue(c);
    row.gap = 1.0 - row.lambda2;
    row.phi = conductance(c, c.size() <= kMaxExhaustiveStates ? CutFamily::Exhaustive
                                                               : CutFamily::Contiguous)
                  .phi;
    res.rows.push_back(row);
    xs.push_back(d);
    ys.push_back(row.gap);
  }
  res.exponent = rmt::loglog_slope(xs, ys);
  return res;
}

}  // namespace qtherm::randomwalk
