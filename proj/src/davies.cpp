#include "qtherm/davies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace qtherm::davies {

using superop::Metric;

void InteractionSet::validate() const {
  if (ops.empty()) throw ValidationError("interaction set is empty");
  for (const Mat& A : ops) {
    if (A.rows() != A.cols()) throw ValidationError("interaction operator is not square");
    if (hermiticity_defect(A) > 1e-10) throw ValidationError("interaction operator is not Hermitian");
    if (A.rows() != ops.front().rows()) throw ValidationError("interaction operators differ in size");
  }
}

std::vector<std::string> family_strings(const std::string& family, int L) {
  std::vector<std::string> out;
  if (family == "sigma_x_sites") {
    for (int i = 0; i < L; ++i) out.push_back(spectrum::place_paulis(L, {i}, "X"));
    return out;
  }
  std::string letters;
  if (family == "xxx") letters = "XXX";
  else if (family == "zzz") letters = "ZZZ";
  else if (family == "xyz") letters = "XYZ";
  else throw ValidationError("unknown interaction family '" + family + "'");
  if (L < 3) throw ValidationError("three-body family needs at least 3 sites");
  for (int i = 0; i < L; ++i) out.push_back(spectrum::place_paulis(L, {i, i + 1, i + 2}, letters));
  return out;
}

InteractionSet from_pauli_strings(const spectrum::SpectralModel& model,
                                  const std::vector<std::string>& strings, std::string label) {
  InteractionSet s;
  s.label = std::move(label);
  for (const auto& p : strings) {
    Mat op = spectrum::pauli_string(p);
    Mat e = model.to_energy_basis(op);
    s.ops.push_back(0.5 * (e + e.adjoint()));
  }
  s.validate();
  return s;
}

InteractionSet make_interactions(const spectrum::SpectralModel& model, const std::string& family,
                                 int L, int count) {
  auto strings = family_strings(family, L);
  if (count >= 0) {
    if (count > static_cast<int>(strings.size()))
      throw ValidationError("family '" + family + "' has only " + std::to_string(strings.size()) +
                            " members");
    strings.resize(count);
  }
  return from_pauli_strings(model, strings, family);
}

Mat fourier_component(const Mat& A, const RoundedSpectrum& r, long k) {
  Mat out = Mat::Zero(A.rows(), A.cols());
  for (const auto& b1 : r.bins) {
    int p2 = r.find(b1.k - k);
    if (p2 < 0) continue;
    const auto& b2 = r.bins[p2];
    out.block(b2.begin, b1.begin, b2.rank(), b1.rank()) =
        A.block(b2.begin, b1.begin, b2.rank(), b1.rank());
  }
  return out;
}

std::vector<long> present_frequencies(const RoundedSpectrum& r) {
  std::set<long> ks;
  for (const auto& a : r.bins)
    for (const auto& b : r.bins) ks.insert(a.k - b.k);
  return {ks.begin(), ks.end()};
}

void TrueGeneratorConfig::validate() const {
  if (m < 1) throw ValidationError("coherence width multiple m must be >= 1");
}

namespace {

void require_capacity(const RoundedSpectrum& r) {
  if (r.dim() > superop::kMaxDenseDim)
    throw CapacityError("dense generator limited to dimension " +
                        std::to_string(superop::kMaxDenseDim) + ", got " + std::to_string(r.dim()));
}

double beta_of(const Rates& rates) { return rates.bath ? rates.bath->beta : 0.0; }

}  // namespace

Superoperator dissipator_heisenberg(const RoundedSpectrum& r, const InteractionSet& ints,
                                    const Rates& rates, int m, const std::function<bool(long)>& keep) {
  require_capacity(r);
  ints.validate();
  const int d = r.dim();
  if (ints.ops.front().rows() != d) throw ValidationError("interaction size does not match spectrum");
  std::vector<long> freqs;
  for (long k : present_frequencies(r))
    if (!keep || keep(k)) freqs.push_back(k);
  const double nu0 = r.nu0;
  const double beta = beta_of(rates);
  const Mat I = Mat::Identity(d, d);
  Superoperator D = Superoperator::zero(d);
  Mat& M = D.matrix();
  for (const Mat& A : ints.ops) {
    std::map<long, Mat> comp;
    for (long k : freqs) comp.emplace(k, fourier_component(A, r, k));
    for (long k : freqs) {
      const Mat& Ak = comp.at(k);
      for (long kp : freqs) {
        if (std::abs(k - kp) > m) continue;
        const double g = rates(0.5 * (k + kp) * nu0);
        if (g == 0.0) continue;
        const double wm = 0.5 * (k - kp) * nu0;
        // e / (1 + e) with e = exp(beta wm), written to avoid overflow
        const double p = 1.0 / (1.0 + std::exp(-beta * wm));
        const double q = 1.0 - p;
        const Mat Akp_dag = comp.at(kp).adjoint();
        superop::add_sandwich(M, Akp_dag, Ak, g);
        const Mat K = Akp_dag * Ak;
        superop::add_sandwich(M, I, K, -g * p);
        superop::add_sandwich(M, K, I, -g * q);
      }
    }
  }
  D.hermiticity_preserving = true;
  D.trace_preserving = true;
  return D;
}

namespace {

Superoperator to_schrodinger(const Superoperator& heis) {
  Superoperator s = superop::adjoint(heis, Metric::trace());
  s.hermiticity_preserving = heis.hermiticity_preserving;
  s.trace_preserving = true;
  return s;
}

// X -> i [H, X]
void add_heisenberg_commutator(Mat& M, const Mat& H, double weight) {
  const Mat I = Mat::Identity(H.rows(), H.cols());
  superop::add_sandwich(M, H, I, cplx(0, weight));
  superop::add_sandwich(M, I, H, cplx(0, -weight));
}

}  // namespace

Superoperator rounded_davies(const RoundedSpectrum& r, const InteractionSet& ints, const Rates& rates,
                             const DaviesOptions& opts) {
  Superoperator heis = dissipator_heisenberg(r, ints, rates, 0, opts.keep_frequency);
  if (opts.system_hamiltonian) {
    Mat Hbar = r.rounded_energies().cast<cplx>().asDiagonal();
    add_heisenberg_commutator(heis.matrix(), Hbar, 1.0);
  }
  if (opts.lamb_shift) {
    if (!rates.bath) throw ValidationError("Lamb shift needs a bath profile");
    add_heisenberg_commutator(heis.matrix(), lamb_shift_hamiltonian(r, ints, *rates.bath, 0),
                              opts.lambda2);
  }
  return to_schrodinger(heis);
}

Superoperator true_dissipator(const RoundedSpectrum& r, const InteractionSet& ints,
                              const Rates& rates, const TrueGeneratorConfig& cfg) {
  cfg.validate();
  Superoperator s = to_schrodinger(dissipator_heisenberg(r, ints, rates, cfg.m));
  return s;
}

Mat lamb_shift_hamiltonian(const RoundedSpectrum& r, const InteractionSet& ints,
                           const bath::BathProfile& b, int m) {
  ints.validate();
  const int d = r.dim();
  const auto freqs = present_frequencies(r);
  std::map<long, cplx> G;
  for (long k : freqs) G.emplace(k, bath::gamma_big(b, k * r.nu0));
  Mat H = Mat::Zero(d, d);
  for (const Mat& A : ints.ops) {
    std::map<long, Mat> comp;
    for (long k : freqs) comp.emplace(k, fourier_component(A, r, k));
    for (long k : freqs)
      for (long kp : freqs) {
        if (std::abs(k - kp) > m) continue;
        const cplx S = (G.at(k) - std::conj(G.at(kp))) / cplx(0, 2);
        H += S * (comp.at(kp).adjoint() * comp.at(k));
      }
  }
  return 0.5 * (H + H.adjoint());
}

LambResidual lamb_shift_residual(const RoundedSpectrum& r, const InteractionSet& ints,
                                 const bath::BathProfile& b, const TrueGeneratorConfig& cfg) {
  cfg.validate();
  require_capacity(r);
  const RVec sig = spectrum::gibbs_weights(r, b.beta).rounded_diag;
  const Mat H = lamb_shift_hamiltonian(r, ints, b, cfg.m);
  const Mat S = sig.cast<cplx>().asDiagonal();
  const Mat C = H * S - S * H;
  LambResidual out;
  out.commutator_norm = trace_norm_hermitian(cplx(0, 1) * C);
  Superoperator L = Superoperator::zero(r.dim());
  add_heisenberg_commutator(L.matrix(), H, 1.0);
  L.hermiticity_preserving = true;
  out.self_adjoint_norm = superop::hermitian_split(L, Metric::weighted(sig)).self_adjoint.matrix().norm();
  return out;
}

std::vector<LambScalingRow> lamb_shift_scaling(const spectrum::SpectralModel& model,
                                               const InteractionSet& ints, const bath::BathProfile& b,
                                               const TrueGeneratorConfig& cfg,
                                               const std::vector<double>& nu0_grid) {
  std::vector<LambScalingRow> rows;
  for (double nu0 : nu0_grid) {
    auto r = spectrum::round_spectrum(model, nu0);
    rows.push_back({nu0, lamb_shift_residual(r, ints, b, cfg)});
  }
  return rows;
}

StructureReport check_structure(const Superoperator& schrodinger, const RVec& sigma) {
  const int d = schrodinger.dim();
  Superoperator heis = superop::adjoint(schrodinger, Metric::trace());
  StructureReport rep;
  rep.trace_residual = heis.apply(Mat::Identity(d, d)).cwiseAbs().maxCoeff();
  rep.detailed_balance = superop::self_adjoint_defect(heis, Metric::weighted(sigma));
  const Mat S = (sigma / sigma.sum()).cast<cplx>().asDiagonal();
  rep.fixed_point = schrodinger.apply(S).cwiseAbs().maxCoeff();
  return rep;
}

GapInfo generator_gap(const Superoperator& schrodinger, const RVec& sigma) {
  auto ev = superop::spectrum_of(schrodinger, Metric::weighted_inverse(sigma));
  GapInfo g;
  g.lambda1 = ev.size() > 0 ? ev[0].real() : 0.0;
  g.lambda2 = ev.size() > 1 ? ev[1].real() : 0.0;
  return g;
}

double mlsi_lower_bound(double gap, const RVec& sigma) {
  const double inv_norm = 1.0 / sigma.minCoeff();
  return 2.0 * gap / (std::log(inv_norm) + 2.0);
}

double fit_decay_rate(const std::vector<double>& t, const std::vector<double>& y, double lo, double hi) {
  if (y.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double cap = hi * y.front();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(y[i] > lo) || y[i] > cap) continue;
    const double ly = std::log(y[i]);
    sx += t[i];
    sy += ly;
    sxx += t[i] * t[i];
    sxy += t[i] * ly;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double den = n * sxx - sx * sx;
  if (den == 0) return std::numeric_limits<double>::quiet_NaN();
  return -(n * sxy - sx * sy) / den;
}

ConvergenceCurve converge_to_gibbs(const Superoperator& L, const Mat& rho0, const Mat& sigma,
                                   const std::vector<double>& times) {
  if (L.dim() > superop::kMaxDenseDim) throw CapacityError("convergence curves need d <= 64");
  ConvergenceCurve c;
  c.times = times;
  for (const Mat& rho : superop::evolve(L, rho0, times)) c.distance.push_back(trace_norm_hermitian(rho - sigma));
  c.fitted_rate = fit_decay_rate(c.times, c.distance);
  return c;
}

}  // namespace qtherm::davies
