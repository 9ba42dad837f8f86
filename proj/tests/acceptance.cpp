// Acceptance suite: one PASS/FAIL line per criterion.  `acceptance 3 11`
// runs a subset.

#include <algorithm>
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fftw3.h>
#include <sys/wait.h>
#include <unistd.h>

#include "qtherm/bath.hpp"
#include "qtherm/davies.hpp"
#include "qtherm/expander.hpp"
#include "qtherm/metropolis.hpp"
#include "qtherm/randomwalk.hpp"
#include "qtherm/rmt.hpp"
#include "qtherm/spectrum.hpp"
#include "qtherm/superop.hpp"

using namespace qtherm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double r_squared(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy * sxy / (sxx * syy);
}

spectrum::SpectralModel chain_model(int L, bool periodic = true) {
  spectrum::SpinChainParams p;
  p.L = L;
  p.periodic = periodic;
  return spectrum::diagonalize(spectrum::build_chain(p));
}

Mat diag_state(const RVec& d) { return d.cast<cplx>().asDiagonal(); }

// ---------------------------------------------------------------------------

Outcome kms_identity() {
  double worst = 0;
  for (double beta : {0.0, 0.5, 1.0, 2.0}) {
    const bath::BathProfile b{beta, 1.0};
    for (int k = 0; k < 1000; ++k) {
      const double w = -6.0 + 12.0 * k / 999.0;
      const double lhs = bath::gamma(b, -w);
      const double rhs = std::exp(-beta * w) * bath::gamma(b, w);
      worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
    }
  }
  return {worst <= 1e-12, fmt("max relative error %.3g over 4 x 1000 points", worst)};
}

// Riemann sum of e^{i w s} C(s) on a symmetric grid through one FFT.
Outcome bath_fourier() {
  double worst = 0;
  int checked = 0;
  for (double beta : {0.0, 1.0, 2.0}) {
    for (double delta : {0.5, 1.0, 2.0}) {
      const bath::BathProfile b{beta, delta};
      const int n = 1 << 14;
      const double span = 80.0 / delta;
      const double ds = span / n;
      const double s0 = -0.5 * span;
      fftw_complex* buf = fftw_alloc_complex(n);
      for (int j = 0; j < n; ++j) {
        const cplx c = bath::correlator_gamma(b, s0 + j * ds);
        buf[j][0] = c.real() * ds;
        buf[j][1] = c.imag() * ds;
      }
      fftw_plan plan = fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
      fftw_execute(plan);
      for (int k = 0; k < n; ++k) {
        const int kk = k < n / 2 ? k : k - n;
        const double w = 2.0 * M_PI * kk / span;
        if (std::abs(w) > 6.0 * delta) continue;
        const cplx g = std::polar(1.0, w * s0) * cplx(buf[k][0], buf[k][1]);
        worst = std::max(worst, std::abs(g - bath::gamma(b, w)));
        ++checked;
      }
      fftw_destroy_plan(plan);
      fftw_free(buf);
    }
  }
  return {worst <= 1e-6, fmt("max |FFT - gamma| %.3g over %d frequencies", worst, checked)};
}

Outcome rounded_davies_structure() {
  std::string detail;
  bool ok = true;
  for (int L : {4, 6}) {
    const auto model = chain_model(L);
    const auto r = spectrum::round_spectrum(model, 0.25);
    const auto ints = davies::make_interactions(model, "sigma_x_sites", L);
    davies::Rates rates;
    rates.bath = bath::BathProfile{1.0, 1.0};
    const auto Lg = davies::rounded_davies(r, ints, rates);
    const auto s = davies::check_structure(Lg, spectrum::gibbs_weights(r, 1.0).rounded_diag);
    ok = ok && s.trace_residual <= 1e-10 && s.detailed_balance <= 1e-10 && s.fixed_point <= 1e-10;
    detail += fmt("L=%d TP %.2g DB %.2g fix %.2g; ", L, s.trace_residual, s.detailed_balance,
                  s.fixed_point);
  }
  return {ok, detail};
}

Outcome true_dissipator_structure() {
  const auto model = chain_model(2);
  const double nu0 = 0.2, beta = 1.0;
  const auto r = spectrum::round_spectrum(model, nu0);
  const auto ints = davies::make_interactions(model, "sigma_x_sites", 2);
  davies::Rates rates;
  rates.bath = bath::BathProfile{beta, 1.0};
  const RVec sigma = spectrum::gibbs_weights(r, beta).rounded_diag;
  bool ok = true;
  std::vector<double> neg;
  std::string detail;
  for (int m : {1, 2, 4, 8}) {
    const auto D = davies::true_dissipator(r, ints, rates, {m});
    const auto s = davies::check_structure(D, sigma);
    ok = ok && s.trace_residual <= 1e-10 && s.detailed_balance <= 1e-10 && s.fixed_point <= 1e-10;
    neg.push_back(std::max(0.0, -superop::conditional_choi_min_eigenvalue(D)));
    detail += fmt("m=%d TP %.1g DB %.1g fix %.1g neg %.3g; ", m, s.trace_residual,
                  s.detailed_balance, s.fixed_point, neg.back());
  }
  // Negativity must not grow as the coherence width shrinks, and must
  // actually vary across the sweep.
  bool monotone = true;
  for (size_t i = 1; i < neg.size(); ++i) monotone = monotone && neg[i - 1] <= neg[i] + 1e-12;
  monotone = monotone && neg.back() > neg.front() + 1e-8;
  return {ok && monotone, detail};
}

// Gaussian expectation of the two-bin Heisenberg generator, assembled entry by
// entry from E[G^dag X G] = V Tr[X] I and E[G^dag G] = V r I.
Mat expected_map_oracle(double V, int r1, int r2, double gp, double gm) {
  const int n1 = r1 * r1, n2 = r2 * r2;
  Mat M = Mat::Zero(n1 + n2, n1 + n2);
  for (int j = 0; j < r1; ++j)
    for (int i = 0; i < r1; ++i) {
      const int col = i + r1 * j;
      M(col, col) += -gp * V * r2;
      if (i == j)
        for (int k = 0; k < r2; ++k) M(n1 + k + r2 * k, col) += gm * V;
    }
  for (int j = 0; j < r2; ++j)
    for (int i = 0; i < r2; ++i) {
      const int col = n1 + i + r2 * j;
      M(col, col) += -gm * V * r1;
      if (i == j)
        for (int k = 0; k < r1; ++k) M(k + r1 * k, col) += gp * V;
    }
  return M;
}

Outcome expected_block_closed_forms() {
  Rng rng = stream(2024, 5);
  std::uniform_int_distribution<int> rank(1, 6);
  std::uniform_real_distribution<double> u(0.05, 2.0);
  double worst = 0;
  for (int t = 0; t < 20; ++t) {
    const int r1 = rank(rng), r2 = rank(rng);
    const double V = u(rng), gp = u(rng), gm = u(rng);
    const Mat oracle = expected_map_oracle(V, r1, r2, gp, gm);
    worst = std::max(worst, (oracle - rmt::expected_sector_map(V, r1, r2, gp, gm)).cwiseAbs().maxCoeff());
    Eigen::ComplexEigenSolver<Mat> es(oracle, false);
    std::vector<double> got;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
      worst = std::max(worst, std::abs(es.eigenvalues()(i).imag()));
      got.push_back(es.eigenvalues()(i).real());
    }
    std::vector<double> want;
    for (const auto& c : rmt::expected_block_map(V, r1, r2, gp, gm))
      for (int k = 0; k < c.multiplicity; ++k) want.push_back(c.value);
    if (want.size() != got.size()) return {false, fmt("config %d: %zu eigenvalues, expected %zu", t, got.size(), want.size())};
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    for (size_t i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
  }
  return {worst <= 1e-12, fmt("max deviation %.3g over 20 configs", worst)};
}

Outcome gap_vs_count() {
  expander::ScanConfig cfg;
  for (int a = 1; a <= 8; ++a) {
    expander::ScanPoint p;
    p.L = 8;
    p.count = a;
    p.nu0 = 0.1;
    p.omega_k = 2;
    cfg.points.push_back(p);
  }
  const auto rows = expander::scan_gaps(cfg, 1);
  std::vector<double> x, y;
  std::string gaps;
  for (const auto& r : rows) {
    if (!r.error.empty()) return {false, "scan point failed: " + r.error};
    x.push_back(r.point.count);
    y.push_back(r.report.gap);
    gaps += fmt("%.4g ", r.report.gap);
  }
  const double r2 = r_squared(x, y);
  return {r2 >= 0.9, fmt("ranks %d/%d, gaps %sR^2 %.4f", rows[0].rank1, rows[0].rank2, gaps.c_str(), r2)};
}

Outcome deviation_trend() {
  std::vector<double> med;
  for (int a : {1, 16}) {
    expander::ScanConfig cfg;
    cfg.V = 1.0;
    for (int s = 0; s < 20; ++s) {
      expander::ScanPoint p;
      p.L = 8;
      p.count = a;
      p.nu0 = 0.2;
      p.omega_k = 2;
      p.gaussian = true;
      p.seed = 1000 + s;
      cfg.points.push_back(p);
    }
    std::vector<double> ratios;
    for (const auto& r : expander::scan_gaps(cfg, 1)) {
      if (!r.error.empty()) return {false, "scan point failed: " + r.error};
      ratios.push_back(r.report.ratio);
    }
    med.push_back(median(ratios));
  }
  return {med[1] <= 0.5 * med[0], fmt("median ratio |a|=1: %.4g, |a|=16: %.4g", med[0], med[1])};
}

// Displacements whose primed bins coincide with the unprimed ones (k' = +-w)
// overlap the diagonal sector; they are checked for negativity but kept out
// of the spread.
Outcome offdiag_sectors() {
  const long wk = 2;
  expander::ScanConfig cfg;
  for (long kp = -4; kp <= 8; ++kp) {
    if (kp == 0) continue;
    expander::ScanPoint p;
    p.L = 8;
    p.count = 8;
    p.nu0 = 0.2;
    p.omega_k = wk;
    p.kprime = kp;
    cfg.points.push_back(p);
  }
  bool negative = true;
  double lo = 1e300, hi = 0, lo_all = 1e300, hi_all = 0;
  int tested = 0, skipped = 0;
  std::string detail;
  for (const auto& r : expander::scan_gaps(cfg, 1)) {
    if (!r.error.empty()) {
      ++skipped;
      continue;
    }
    ++tested;
    const double lm = r.report.lambda_top;
    negative = negative && lm < 0;
    const double mag = std::abs(lm);
    lo_all = std::min(lo_all, mag);
    hi_all = std::max(hi_all, mag);
    if (std::abs(r.point.kprime) != wk) {
      lo = std::min(lo, mag);
      hi = std::max(hi, mag);
    }
    detail += fmt("k'=%ld:%.3g ", r.point.kprime, lm);
  }
  const double spread = hi / lo;
  detail += fmt("| %d sectors (%d empty), spread %.3g (%.3g incl. bin-coincident)", tested, skipped,
                spread, hi_all / lo_all);
  return {tested > 0 && negative && spread <= 2.0, detail};
}

randomwalk::SpectralChain make_chain(const RMat& K, const RVec& pi) {
  randomwalk::SpectralChain c;
  c.labels = RVec::LinSpaced(K.rows(), 0, K.rows() - 1);
  c.kernel = K;
  c.pi = pi / pi.sum();
  c.discrete = true;
  c.reversible = true;
  return c;
}

// Metropolis chain toward a random target with random symmetric proposals.
randomwalk::SpectralChain random_reversible(int n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RVec pi(n);
  for (int i = 0; i < n; ++i) pi(i) = std::exp(3.0 * u(rng));
  pi /= pi.sum();
  RMat q = RMat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (u(rng) < 0.5 || j == i + 1) q(i, j) = q(j, i) = u(rng);
  q /= q.rowwise().sum().maxCoeff();
  RMat K = RMat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      if (i != j) K(i, j) = q(i, j) * std::min(1.0, pi(j) / pi(i));
    K(i, i) = 1.0 - K.row(i).sum();
  }
  return make_chain(K, pi);
}

Outcome cheeger_corpus() {
  std::vector<std::pair<std::string, randomwalk::SpectralChain>> corpus;
  {
    RMat K(2, 2);
    K << 0.75, 0.25, 0.25, 0.75;
    corpus.emplace_back("two-state", make_chain(K, RVec::Ones(2)));
  }
  {
    RMat K = RMat::Zero(4, 4);
    for (int i = 0; i < 4; ++i) K(i, (i + 1) % 4) = K(i, (i + 3) % 4) = 0.5;
    corpus.emplace_back("ring-4", make_chain(K, RVec::Ones(4)));
  }
  Rng rng = stream(99, 0);
  for (int n : {3, 5, 8, 12, 16, 20, 40})
    for (int rep = 0; rep < 3; ++rep) corpus.emplace_back(fmt("random-%d", n), random_reversible(n, rng));
  {
    randomwalk::DensitySpec small;
    small.half_width = 2.0;
    small.nu0 = 0.25;
    const auto g = randomwalk::binned_gibbs(small, 0.5);
    corpus.emplace_back("phi-walk-small", randomwalk::phi_walk(g, 0.5));
    const auto big = randomwalk::binned_gibbs(randomwalk::DensitySpec{}, 0.5);
    for (double d : {0.1, 0.4, 1.6}) corpus.emplace_back(fmt("phi-walk-%.1f", d), randomwalk::phi_walk(big, d));
    randomwalk::DensitySpec bi;
    bi.kind = "bimodal";
    bi.variance = 0.5;
    bi.separation = 8.0;
    bi.nu0 = 0.1;
    corpus.emplace_back("phi-walk-bimodal", randomwalk::phi_walk(randomwalk::binned_gibbs(bi, 0.5), 0.4));
  }
  {
    spectrum::SpinChainParams sp;
    sp.L = 8;
    // Bulk window; the sparse upper tail has level gaps beyond the kernel width.
    const auto model = spectrum::diagonalize(spectrum::build_chain(sp), spectrum::Window{-5.0, 5.0});
    const auto r = spectrum::round_spectrum(model, 0.2);
    const auto eth = spectrum::make_eth(r, 0.8);
    corpus.emplace_back("metropolis-bins", randomwalk::metropolis_chain(r, eth, 0.5, 0.8, false));
    corpus.emplace_back("metropolis-leveled", randomwalk::metropolis_chain(r, eth, 0.5, 0.8, true));
    corpus.emplace_back("eth-uniformized",
                        randomwalk::uniformize(randomwalk::eth_generator(r, eth, bath::BathProfile{0.5, 1.0}, 8)));
  }
  {
    const auto model = chain_model(4, false);
    const auto ints = davies::make_interactions(model, "sigma_x_sites", 4);
    corpus.emplace_back("eigenstate-metropolis",
                        randomwalk::eigenstate_metropolis_chain(model.eigenvalues, ints.ops,
                                                                std::vector<double>(4, 0.25), 0.7));
  }
  int held = 0, exhaustive = 0;
  std::string failures;
  for (const auto& [name, c] : corpus) {
    try {
      const auto res = randomwalk::cheeger_check(c);
      if (res.holds) ++held;
      else failures += fmt("%s(l2 %.6g in [%.6g, %.6g]) ", name.c_str(), res.lambda2, res.lower, res.upper);
      if (res.family == randomwalk::CutFamily::Exhaustive) ++exhaustive;
    } catch (const std::exception& e) {
      failures += name + "(" + e.what() + ") ";
    }
  }
  const int n = static_cast<int>(corpus.size());
  return {held == n && exhaustive > 0,
          fmt("%d/%d chains, %d with exhaustive cuts %s", held, n, exhaustive, failures.c_str())};
}

Outcome rw_scaling() {
  const auto g = randomwalk::binned_gibbs(randomwalk::DensitySpec{}, 0.5);
  const auto res = randomwalk::lambda_rw_scaling(g, {0.1, 0.2, 0.4, 0.8});
  std::string gaps;
  for (const auto& r : res.rows) gaps += fmt("%.4g ", r.gap);
  return {std::abs(res.exponent - 2.0) <= 0.3, fmt("gaps %sexponent %.4f", gaps.c_str(), res.exponent)};
}

// Open chain, bins narrower than the smallest level spacing: every bin holds
// one eigenstate, so the classical chain is defined on eigenstates.
Outcome perfect_metropolis() {
  const double beta = 0.5;
  const auto model = chain_model(6, false);
  double spacing = 1e300;
  for (int i = 1; i < model.size(); ++i)
    spacing = std::min(spacing, model.eigenvalues(i) - model.eigenvalues(i - 1));
  const double nu0 = 0.5 * spacing;
  const auto r = spectrum::round_spectrum(model, nu0);
  const auto ints = davies::make_interactions(model, "sigma_x_sites", 6);
  metropolis::QPEModel q;
  q.mode = metropolis::QPEMode::Perfect;
  q.nu0 = nu0;
  metropolis::MetropolisConfig cfg;
  cfg.beta = beta;
  const metropolis::MetropolisMap N(r, ints, cfg, q);
  const RMat T = metropolis::diagonal_reduction(N);
  const auto classical = randomwalk::eigenstate_metropolis_chain(r.rounded_energies(), ints.ops,
                                                                 cfg.weights(ints.count()), beta);
  const double diff = (T - classical.kernel).cwiseAbs().maxCoeff();
  auto reduced = classical;
  reduced.kernel = T;
  const RVec pi = randomwalk::stationary(reduced);
  const double tv = 0.5 * (pi - spectrum::gibbs_weights(r, beta).rounded_diag).cwiseAbs().sum();
  return {diff <= 1e-12 && tv <= 1e-8,
          fmt("%d bins, max |T - K| %.3g, TV to Gibbs %.3g", r.num_bins(), diff, tv)};
}

Outcome finite_metropolis() {
  const int L = 5;
  const double beta = 0.5;
  const auto model = chain_model(L);
  const auto ints = davies::make_interactions(model, "sigma_x_sites", L);
  auto eps = [&](double nu0, int r_rej) {
    const auto r = spectrum::round_spectrum(model, nu0);
    metropolis::QPEModel q;
    q.nu0 = nu0;
    metropolis::MetropolisConfig cfg;
    cfg.beta = beta;
    cfg.r_rej = r_rej;
    const metropolis::MetropolisMap N(r, ints, cfg, q);
    const auto b = N.materialize();
    return metropolis::epsilon_db(b, metropolis::reference_state(r, q, beta), 4, 7).value;
  };
  const std::vector<double> nus{0.8, 0.4, 0.2, 0.1};
  std::vector<double> e_nu, e_r;
  std::string detail = "eps(nu0):";
  for (double nu : nus) {
    e_nu.push_back(eps(nu, 1));
    detail += fmt(" %.4g", e_nu.back());
  }
  const std::vector<double> rrs{1, 2, 4, 8};
  detail += "; eps(r_rej):";
  for (double rr : rrs) {
    e_r.push_back(eps(0.2, static_cast<int>(rr)));
    detail += fmt(" %.4g", e_r.back());
  }
  const double s_nu = rmt::loglog_slope(nus, e_nu);
  const double s_r = rmt::loglog_slope(rrs, e_r);
  // Symmetry identities, perfect and two-bin modes.
  double sym = 0;
  for (auto mode : {metropolis::QPEMode::Perfect, metropolis::QPEMode::TwoBin}) {
    const auto r = spectrum::round_spectrum(model, 0.2);
    metropolis::QPEModel q;
    q.nu0 = 0.2;
    q.mode = mode;
    metropolis::MetropolisConfig cfg;
    cfg.beta = beta;
    cfg.r_rej = 2;
    const auto s = metropolis::symmetry_residuals(metropolis::MetropolisMap(r, ints, cfg, q));
    sym = std::max({sym, s.acceptance, s.rejection});
  }
  detail += fmt("; slope nu0 %.3f, slope r_rej %.3f, symmetry %.3g", s_nu, s_r, sym);
  const bool ok = std::abs(s_nu - 1.0) <= 0.3 && std::abs(s_r - 1.0) <= 0.5 && sym <= 1e-10;
  return {ok, detail};
}

Outcome rmt_norms() {
  const auto st = rmt::spectral_norm_mc(256, 256, 1.0, 20, 5);
  const double edge = 2.0 * std::sqrt(256.0);
  const double rel = std::abs(st.mean - edge) / edge;
  const std::vector<int> counts{1, 4, 16};
  const auto rows = rmt::sum_concentration_mc(rmt::SumKind::Tensor, counts, 64, 1.0, 10, 9);
  std::vector<double> x, y;
  for (const auto& r : rows) {
    x.push_back(r.count);
    y.push_back(r.stats.mean);
  }
  const double slope = rmt::loglog_slope(x, y);
  return {rel <= 0.05 && std::abs(slope + 0.5) <= 0.15,
          fmt("mean ||G|| %.4f vs edge %.1f (%.2f%%); tensor means %.4g %.4g %.4g, exponent %.3f",
              st.mean, edge, 100 * rel, y[0], y[1], y[2], slope)};
}

Outcome davies_convergence() {
  const double beta = 1.0;
  const auto model = chain_model(6);
  const auto r = spectrum::round_spectrum(model, 0.25);
  const auto ints = davies::make_interactions(model, "sigma_x_sites", 6);
  davies::Rates rates;
  rates.bath = bath::BathProfile{beta, 1.0};
  const auto L = davies::rounded_davies(r, ints, rates);
  const RVec sigma = spectrum::gibbs_weights(r, beta).rounded_diag;
  const auto gap = davies::generator_gap(L, sigma);
  const double tau = 20.0 / std::abs(gap.lambda2);
  std::vector<double> ts;
  for (int k = 0; k <= 200; ++k) ts.push_back(tau * k / 200.0);
  const int d = r.dim();
  Mat rho0 = Mat::Zero(d, d);
  rho0(d - 1, d - 1) = 1.0;
  const auto c = davies::converge_to_gibbs(L, rho0, diag_state(sigma), ts);
  const double tv = 0.5 * c.distance.back();
  const double ratio = c.fitted_rate / std::abs(gap.lambda2);
  return {tv <= 1e-3 && ratio >= 1.0 / 3 && ratio <= 3.0,
          fmt("lambda2 %.4g, TV(tau) %.3g, fitted rate / |lambda2| %.3f", gap.lambda2, tv, ratio)};
}

// ---------------------------------------------------------------------------

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(QTHERM_CLI) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

Outcome cli_reproducibility() {
  const fs::path cfg_dir = fs::path(QTHERM_CONFIG_DIR);
  const fs::path work = fs::temp_directory_path() / fs::path("qtherm-repro-" + std::to_string(::getpid()));
  fs::remove_all(work);
  const std::vector<std::string> subs{"diagonalize", "bath-table", "davies-evolve", "expander-scan",
                                      "rmt-concentration", "rw-gap", "metropolis-run"};
  int files = 0;
  std::string problems;
  for (const auto& sub : subs) {
    const fs::path cfg = cfg_dir / (sub + ".json");
    for (int run = 0; run < 2; ++run) {
      const fs::path out = work / sub / std::to_string(run);
      const int rc = run_cli(sub + " --config " + cfg.string() + " --out " + out.string() + " --seed 17");
      if (rc != 0) problems += fmt("%s exit %d; ", sub.c_str(), rc);
    }
    const fs::path a = work / sub / "0", b = work / sub / "1";
    if (!fs::exists(a)) continue;
    for (const auto& e : fs::directory_iterator(a)) {
      if (e.path().extension() != ".csv") continue;
      ++files;
      const fs::path other = b / e.path().filename();
      if (!fs::exists(other) || read_file(e.path()) != read_file(other))
        problems += sub + "/" + e.path().filename().string() + " differs; ";
    }
  }
  fs::remove_all(work);
  return {problems.empty() && files >= static_cast<int>(subs.size()),
          fmt("%d CSV files compared across 2 runs %s", files, problems.c_str())};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "kms-identity", kms_identity},
      {2, "bath-fourier-consistency", bath_fourier},
      {3, "rounded-davies-structure", rounded_davies_structure},
      {4, "true-dissipator-structure", true_dissipator_structure},
      {5, "expected-block-closed-forms", expected_block_closed_forms},
      {6, "gap-linear-in-count", gap_vs_count},
      {7, "deviation-ratio-trend", deviation_trend},
      {8, "offdiagonal-sectors", offdiag_sectors},
      {9, "cheeger-sandwich", cheeger_corpus},
      {10, "random-walk-gap-scaling", rw_scaling},
      {11, "perfect-qpe-metropolis", perfect_metropolis},
      {12, "finite-qpe-metropolis", finite_metropolis},
      {13, "rmt-norms", rmt_norms},
      {14, "davies-convergence", davies_convergence},
      {15, "cli-reproducibility", cli_reproducibility},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2d %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), dt);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
