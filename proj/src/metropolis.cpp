#include "qtherm/metropolis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Eigenvalues>

namespace qtherm::metropolis {

QPEMode parse_qpe_mode(const std::string& s) {
  if (s == "perfect") return QPEMode::Perfect;
  if (s == "two-bin") return QPEMode::TwoBin;
  if (s == "two-bin-with-tail") return QPEMode::TwoBinTail;
  throw ValidationError("unknown qpe mode '" + s + "' (expected perfect, two-bin or two-bin-with-tail)");
}

std::string to_string(QPEMode m) {
  switch (m) {
    case QPEMode::Perfect: return "perfect";
    case QPEMode::TwoBin: return "two-bin";
    case QPEMode::TwoBinTail: return "two-bin-with-tail";
  }
  return "?";
}

double QPEModel::tail_mass() const {
  if (mode != QPEMode::TwoBinTail) return 0.0;
  return r_amp > 0 ? std::exp(-c * r_amp) : p_amp;
}

void QPEModel::validate() const {
  if (!(nu0 > 0) || !std::isfinite(nu0)) throw ValidationError("qpe resolution nu0 must be > 0");
  if (!(p_amp >= 0 && p_amp < 1)) throw ValidationError("p_amp must be in [0, 1)");
  if (!(r_amp >= 0)) throw ValidationError("r_amp must be >= 0");
  if (!(c > 0)) throw ValidationError("amplification constant c must be > 0");
}

double QPEKraus::completeness_residual() const {
  if (amplitudes.empty()) return 0.0;
  RVec s = RVec::Zero(amplitudes[0].size());
  for (const RVec& a : amplitudes) s += a.cwiseAbs2();
  return (s.array() - 1.0).abs().maxCoeff();
}

QPEKraus qpe_kraus(const RoundedSpectrum& r, const QPEModel& qpe) {
  qpe.validate();
  const int d = r.dim();
  QPEKraus out;
  if (qpe.mode == QPEMode::Perfect) {
    out.nu0 = r.nu0;
    for (const auto& b : r.bins) {
      RVec a = RVec::Zero(d);
      a.segment(b.begin, b.rank()).setOnes();
      out.registers.push_back(b.k);
      out.amplitudes.push_back(std::move(a));
    }
    return out;
  }
  out.nu0 = qpe.nu0;
  std::map<long, RVec> weight;  // |alpha|^2 per register
  auto slot = [&](long k) -> RVec& {
    auto it = weight.find(k);
    if (it == weight.end()) it = weight.emplace(k, RVec::Zero(d)).first;
    return it->second;
  };
  const double t = qpe.tail_mass();
  for (int i = 0; i < d; ++i) {
    const double y = r.energies(i) / qpe.nu0;
    long k = static_cast<long>(std::floor(y));
    double x = y - k;
    if (x < 1e-12) x = 0;
    if (x > 1 - 1e-12) {
      x = 0;
      ++k;
    }
    slot(k)(i) += (1 - t) * (1 - x);
    slot(k + 1)(i) += (1 - t) * x;
  }
  if (t > 0) {
    // uniform residue over every register between the extreme brackets
    const long lo = weight.begin()->first, hi = weight.rbegin()->first;
    const double share = t / static_cast<double>(hi - lo + 1);
    for (long k = lo; k <= hi; ++k) slot(k).array() += share;
  }
  for (auto& [k, w] : weight) {
    if (w.maxCoeff() <= 0) continue;
    out.registers.push_back(k);
    out.amplitudes.push_back(w.cwiseSqrt());
  }
  return out;
}

void MetropolisConfig::validate(int count) const {
  if (!std::isfinite(beta) || beta < 0) throw ValidationError("beta must be finite and >= 0");
  if (r_rej < 0) throw ValidationError("r_rej must be >= 0");
  if (r_rej > kMaxRejectionRounds)
    throw CapacityError("r_rej above " + std::to_string(kMaxRejectionRounds));
  if (!p.empty()) {
    if (static_cast<int>(p.size()) != count) throw ValidationError("p(a) needs one entry per interaction");
    double s = 0;
    for (double x : p) {
      if (!(x >= 0)) throw ValidationError("p(a) entries must be >= 0");
      s += x;
    }
    if (std::abs(s - 1) > 1e-12) throw ValidationError("p(a) must sum to one");
  }
}

std::vector<double> MetropolisConfig::weights(int count) const {
  if (!p.empty()) return p;
  return std::vector<double>(count, 1.0 / count);
}

double CPMapBundle::trace_deficit(const Mat& rho) const {
  return 1.0 - total.apply(rho).trace().real();
}

namespace {

Mat psd_sqrt(const Mat& Q) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (Q + Q.adjoint()));
  RVec s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
}

// diag(u) X diag(v)
Mat scale(const RVec& u, const Mat& X, const RVec& v) {
  return u.asDiagonal() * X * v.asDiagonal();
}

}  // namespace

MetropolisMap::MetropolisMap(const RoundedSpectrum& r, const davies::InteractionSet& ints,
                             const MetropolisConfig& cfg, const QPEModel& qpe)
    : d_(r.dim()), cfg_(cfg), qpe_(qpe) {
  ints.validate();
  cfg_.validate(ints.count());
  qpe_.validate();
  for (const Mat& A : ints.ops) {
    if (A.rows() != d_) throw ValidationError("interaction dimension does not match the spectrum");
    Eigen::SelfAdjointEigenSolver<Mat> es(A, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().cwiseAbs().maxCoeff() > 1 + 1e-10)
      throw ValidationError("interactions must satisfy ||A|| <= 1");
  }
  ops_ = ints.ops;
  p_ = cfg_.weights(ints.count());
  kraus_ = qpe_kraus(r, qpe_);
  const int n = kraus_.size();

  accept_weight_.resize(n);
  for (int q1 = 0; q1 < n; ++q1) {
    RMat W = RMat::Zero(d_, d_);
    for (int q2 = 0; q2 < n; ++q2) {
      const RVec& m = kraus_.amplitudes[q2];
      W += factor(q2, q1) * (m * m.transpose());
    }
    accept_weight_[q1] = std::move(W);
  }

  terms_.resize(n);
  if (cfg_.r_rej == 0) return;
  const bool perfect = qpe_.mode == QPEMode::Perfect;
  for (int q1 = 0; q1 < n; ++q1) {
    const RVec& m1 = kraus_.amplitudes[q1];
    const RVec pass = accept_weight_[q1].diagonal();  // sum_q f(q, q1) m_q^2
    const RVec stay = (1.0 - pass.array()).cwiseMax(0.0).matrix();
    for (std::size_t a = 0; a < ops_.size(); ++a) {
      if (p_[a] == 0) continue;
      Term t;
      t.a = static_cast<int>(a);
      t.p = p_[a];
      const Mat& A = ops_[a];
      const Mat Q0 = A * stay.asDiagonal() * A;
      if (perfect) {
        t.sqrt_ideal = psd_sqrt(scale(m1, Q0, m1));
      } else {
        t.sqrt_q0 = psd_sqrt(Q0);
        t.sqrt_q1 = psd_sqrt(A * pass.asDiagonal() * A);
      }
      terms_[q1].push_back(std::move(t));
    }
  }
}

double MetropolisMap::factor(int q2, int q1) const {
  const double w = (kraus_.registers[q2] - kraus_.registers[q1]) * kraus_.nu0;
  return std::min(1.0, std::exp(-cfg_.beta * w));
}

Mat MetropolisMap::accept_register(int q1, const Mat& X) const {
  const RVec& m1 = kraus_.amplitudes[q1];
  const Mat Y = scale(m1, X, m1);
  Mat out = Mat::Zero(d_, d_);
  if (Y.cwiseAbs().maxCoeff() == 0.0) return out;
  for (std::size_t a = 0; a < ops_.size(); ++a) {
    if (p_[a] == 0) continue;
    out += p_[a] * (ops_[a] * Y * ops_[a]);
  }
  return out.cwiseProduct(accept_weight_[q1].cast<cplx>());
}

Mat MetropolisMap::reject_register(int q1, const Mat& X) const {
  Mat out = Mat::Zero(d_, d_);
  if (cfg_.r_rej == 0) return out;
  const RVec& m1 = kraus_.amplitudes[q1];
  const Mat Y = scale(m1, X, m1);
  if (Y.cwiseAbs().maxCoeff() == 0.0) return out;
  if (qpe_.mode == QPEMode::Perfect) {
    for (const Term& t : terms_[q1]) out += t.p * (t.sqrt_ideal * Y * t.sqrt_ideal);
    return out;
  }
  const RVec p0 = (1.0 - m1.array().square()).cwiseMax(0.0).sqrt().matrix();
  for (const Term& t : terms_[q1]) {
    const Mat& s0 = t.sqrt_q0;
    const Mat& s1 = t.sqrt_q1;
    Mat C = s0 * Y * s0;
    Mat acc = C;  // k = 1
    for (int k = 2; k <= cfg_.r_rej; ++k) {
      const Mat D = scale(p0, C, p0);
      acc += s0 * D * s0;
      if (k < cfg_.r_rej) C = s0 * D * s0 + s1 * D * s1;
    }
    out += t.p * scale(m1, acc, m1);
  }
  return out;
}

Mat MetropolisMap::accept(const Mat& X) const {
  if (X.rows() != d_ || X.cols() != d_) throw ValidationError("input has wrong dimension");
  Mat out = Mat::Zero(d_, d_);
  for (int q1 = 0; q1 < kraus_.size(); ++q1) out += accept_register(q1, X);
  return out;
}

Mat MetropolisMap::reject(const Mat& X) const {
  if (X.rows() != d_ || X.cols() != d_) throw ValidationError("input has wrong dimension");
  Mat out = Mat::Zero(d_, d_);
  for (int q1 = 0; q1 < kraus_.size(); ++q1) out += reject_register(q1, X);
  return out;
}

Mat MetropolisMap::apply(const Mat& X) const {
  if (X.rows() != d_ || X.cols() != d_) throw ValidationError("input has wrong dimension");
  Mat out = Mat::Zero(d_, d_);
  for (int q1 = 0; q1 < kraus_.size(); ++q1) out += accept_register(q1, X) + reject_register(q1, X);
  return out;
}

Mat MetropolisMap::accept_pair(int q2, int q1, const Mat& X) const {
  const RVec& m1 = kraus_.amplitudes[q1];
  const RVec& m2 = kraus_.amplitudes[q2];
  const Mat Y = scale(m1, X, m1);
  Mat out = Mat::Zero(d_, d_);
  for (std::size_t a = 0; a < ops_.size(); ++a) {
    if (p_[a] == 0) continue;
    out += p_[a] * (ops_[a] * Y * ops_[a]);
  }
  return factor(q2, q1) * scale(m2, out, m2);
}

Mat MetropolisMap::reject_from(int q1, const Mat& X) const { return reject_register(q1, X); }

std::vector<int> MetropolisMap::support(int q1) const {
  std::vector<int> s;
  const RVec& m = kraus_.amplitudes[q1];
  for (int i = 0; i < d_; ++i)
    if (m(i) != 0) s.push_back(i);
  return s;
}

Superoperator MetropolisMap::build(const std::function<Mat(const Mat&)>& f,
                                   const std::vector<int>& sup) const {
  const Eigen::Index n = static_cast<Eigen::Index>(d_) * d_;
  Mat M = Mat::Zero(n, n);
  Mat E = Mat::Zero(d_, d_);
  for (int j : sup)
    for (int i : sup) {
      E(i, j) = 1;
      const Mat Y = f(E);
      E(i, j) = 0;
      M.col(i + static_cast<Eigen::Index>(d_) * j) += Eigen::Map<const Vec>(Y.data(), n);
    }
  Superoperator S(d_, std::move(M));
  S.hermiticity_preserving = true;
  return S;
}

CPMapBundle MetropolisMap::materialize() const {
  if (d_ > kMaxMaterializeDim)
    throw CapacityError("dense Metropolis map limited to dimension " + std::to_string(kMaxMaterializeDim));
  const Eigen::Index n = static_cast<Eigen::Index>(d_) * d_;
  Mat MA = Mat::Zero(n, n), MR = Mat::Zero(n, n);
  Mat E = Mat::Zero(d_, d_);
  for (int q1 = 0; q1 < kraus_.size(); ++q1) {
    const std::vector<int> sup = support(q1);
    for (int j : sup)
      for (int i : sup) {
        E(i, j) = 1;
        const Mat YA = accept_register(q1, E);
        const Mat YR = reject_register(q1, E);
        E(i, j) = 0;
        const Eigen::Index col = i + static_cast<Eigen::Index>(d_) * j;
        MA.col(col) += Eigen::Map<const Vec>(YA.data(), n);
        MR.col(col) += Eigen::Map<const Vec>(YR.data(), n);
      }
  }
  CPMapBundle b;
  b.acceptance = Superoperator(d_, std::move(MA));
  b.rejection = Superoperator(d_, std::move(MR));
  b.acceptance.hermiticity_preserving = b.rejection.hermiticity_preserving = true;
  b.total = b.acceptance + b.rejection;
  b.total.hermiticity_preserving = true;
  return b;
}

Superoperator MetropolisMap::pair_superop(int q2, int q1) const {
  if (d_ > kMaxMaterializeDim) throw CapacityError("dense pair map above dimension limit");
  return build([&](const Mat& X) { return accept_pair(q2, q1, X); }, support(q1));
}

Superoperator MetropolisMap::rejection_superop(int q1) const {
  if (d_ > kMaxMaterializeDim) throw CapacityError("dense rejection map above dimension limit");
  return build([&](const Mat& X) { return reject_register(q1, X); }, support(q1));
}

RMat diagonal_reduction(const MetropolisMap& N) {
  const int d = N.dim();
  RMat T(d, d);
  Mat E = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    E(i, i) = 1;
    const Mat Y = N.apply(E);
    E(i, i) = 0;
    for (int j = 0; j < d; ++j) T(i, j) = Y(j, j).real();
  }
  return T;
}

SymmetryReport symmetry_residuals(const MetropolisMap& N) {
  const int d = N.dim();
  const int n = N.kraus().size();
  const double beta = N.config().beta;
  const long k0 = N.kraus().registers.empty() ? 0 : N.kraus().registers.front();
  auto boltz = [&](int q) { return std::exp(-beta * (N.kraus().registers[q] - k0) * N.kraus().nu0); };
  std::vector<std::vector<int>> sup(n);
  for (int q = 0; q < n; ++q)
    for (int i = 0; i < d; ++i)
      if (N.kraus().amplitudes[q](i) != 0) sup[q].push_back(i);

  // Matrix block of a map from span{|i><j| : i, j in src} to span over dst.
  auto block = [&](const std::function<Mat(const Mat&)>& f, const std::vector<int>& src,
                   const std::vector<int>& dst) {
    const int ns = static_cast<int>(src.size()), nd = static_cast<int>(dst.size());
    Mat B(nd * nd, ns * ns);
    Mat E = Mat::Zero(d, d);
    for (int b = 0; b < ns; ++b)
      for (int a = 0; a < ns; ++a) {
        E(src[a], src[b]) = 1;
        const Mat Y = f(E);
        E(src[a], src[b]) = 0;
        for (int l = 0; l < nd; ++l)
          for (int k = 0; k < nd; ++k) B(k + nd * l, a + ns * b) = Y(dst[k], dst[l]);
      }
    return B;
  };

  SymmetryReport rep;
  double diff2 = 0, norm2 = 0;
  for (int q1 = 0; q1 < n; ++q1)
    for (int q2 = q1; q2 < n; ++q2) {
      // forward: q1 -> q2; backward: q2 -> q1.  Trace adjoint = conjugate transpose.
      const Mat F = block([&](const Mat& X) { return N.accept_pair(q2, q1, X); }, sup[q1], sup[q2]);
      const Mat B = block([&](const Mat& X) { return N.accept_pair(q1, q2, X); }, sup[q2], sup[q1]);
      const Mat D = F.adjoint() * boltz(q1) - B * boltz(q2);
      diff2 += D.squaredNorm();
      norm2 += (F * boltz(q1)).squaredNorm() + (B * boltz(q2)).squaredNorm();
      ++rep.pairs;
    }
  rep.acceptance = norm2 > 0 ? std::sqrt(diff2 / norm2) : 0.0;

  diff2 = norm2 = 0;
  for (int q1 = 0; q1 < n; ++q1) {
    const Mat R = block([&](const Mat& X) { return N.reject_from(q1, X); }, sup[q1], sup[q1]);
    diff2 += (R - R.adjoint()).squaredNorm();
    norm2 += R.squaredNorm();
  }
  rep.rejection = norm2 > 0 ? std::sqrt(diff2 / norm2) : 0.0;
  return rep;
}

superop::NormEstimate epsilon_db(const CPMapBundle& bundle, const RVec& sigma, int restarts,
                                 std::uint64_t seed) {
  const auto split = superop::hermitian_split(bundle.total, superop::Metric::weighted_inverse(sigma));
  Rng rng = stream(seed, 0);
  return superop::one_one_norm_lower(split.anti_self_adjoint, restarts, rng);
}

RVec reference_state(const RoundedSpectrum& r, const QPEModel& qpe, double beta) {
  const auto g = spectrum::gibbs_weights(r, beta);
  return qpe.mode == QPEMode::Perfect ? g.rounded_diag : g.exact_diag;
}

FixedPointResult iterate_to_fixed_point(const MetropolisMap& N, const Mat& rho0, int ell_max,
                                        const Mat& sigma_target, double tol) {
  const int d = N.dim();
  if (rho0.rows() != d || sigma_target.rows() != d) throw ValidationError("state has wrong dimension");
  if (ell_max < 1) throw ValidationError("ell_max must be >= 1");
  const cplx tr0 = rho0.trace();
  if (!(tr0.real() > 0)) throw ValidationError("initial state must have positive trace");
  FixedPointResult res;
  Mat rho = rho0 / tr0.real();
  double t = 1;
  res.residual = std::numeric_limits<double>::infinity();
  for (int k = 0; k < ell_max; ++k) {
    res.tv.push_back(0.5 * trace_norm_hermitian(rho - sigma_target));
    const Mat Y = N.apply(rho);
    t = Y.trace().real();
    res.trace.push_back(t);
    if (!(t > 0)) throw ConvergenceError("Metropolis map annihilated the state");
    Mat next = Y / t;
    next = 0.5 * (next + next.adjoint());
    res.residual = trace_norm_hermitian(next - rho);
    rho = std::move(next);
    res.steps = k + 1;
    if (res.residual < tol) break;
  }
  if (!(res.residual < tol))
    throw ConvergenceError("power iteration did not converge in " + std::to_string(ell_max) +
                           " steps (residual " + std::to_string(res.residual) + ")");
  res.tv.push_back(0.5 * trace_norm_hermitian(rho - sigma_target));
  res.lambda_lead = t;
  res.sigma_fix = rho;
  res.distance = trace_norm_hermitian(rho - sigma_target);
  return res;
}

std::pair<double, double> leading_eigenvalues(const CPMapBundle& bundle, const RVec& sigma) {
  const auto metric = superop::Metric::weighted_inverse(sigma);
  const auto split = superop::hermitian_split(bundle.total, metric);
  const auto ev = superop::spectrum_of(split.self_adjoint, metric);
  if (ev.size() < 2) return {ev.empty() ? 0.0 : ev[0].real(), 0.0};
  return {ev[0].real(), ev[1].real()};
}

}  // namespace qtherm::metropolis
