#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "qtherm/metropolis.hpp"
#include "qtherm/randomwalk.hpp"

using namespace qtherm;
using namespace qtherm::randomwalk;

namespace {

spectrum::SpectralModel chain_model(int L, bool periodic = true) {
  spectrum::SpinChainParams p;
  p.L = L;
  p.periodic = periodic;
  return spectrum::diagonalize(spectrum::build_chain(p));
}

SpectralChain two_state(double p, double q) {
  SpectralChain c;
  c.labels = RVec::LinSpaced(2, 0, 1);
  c.kernel.resize(2, 2);
  c.kernel << 1 - p, p, q, 1 - q;
  c.pi.resize(2);
  c.pi << q / (p + q), p / (p + q);
  c.reversible = true;
  return c;
}

// phi by enumerating every subset directly from the definition.
double brute_conductance(const SpectralChain& c) {
  const int n = c.size();
  double best = 1e300;
  for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
    double piA = 0, Q = 0;
    for (int i = 0; i < n; ++i)
      if (mask >> i & 1u) piA += c.pi(i);
    if (piA > 0.5 + 1e-14) continue;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if ((mask >> i & 1u) && !(mask >> j & 1u)) Q += c.pi(i) * c.kernel(i, j);
    best = std::min(best, Q / piA);
  }
  return best;
}

spectrum::RoundedSpectrum two_bins(int r1, int r2) {
  RVec e(r1 + r2);
  for (int i = 0; i < r1; ++i) e(i) = 0.0;
  for (int i = 0; i < r2; ++i) e(r1 + i) = 1.0;
  return spectrum::round_energies(e, 1.0);
}

Mat diag_state(const RVec& d) { return d.cast<cplx>().asDiagonal(); }

}  // namespace

TEST(EthGenerator, TwoBinsInfiniteTemperature) {
  const auto r = two_bins(1, 1);
  spectrum::ETHModel eth;
  eth.delta_rmt = 2.0;
  eth.energies = r.energies;
  eth.bandwidth = 4.0;  // both levels in every window: D = 2 / (2 * 4)
  const auto g = eth_generator(r, eth, {0.0, 1.0}, 1);
  const double rate = bath::gamma({0.0, 1.0}, 1.0) * eth.variance(0.0, 1.0);
  RMat want(2, 2);
  want << -rate, rate, rate, -rate;
  EXPECT_LE((g.kernel - want).cwiseAbs().maxCoeff(), 1e-15);
  Eigen::SelfAdjointEigenSolver<RMat> es(g.kernel);
  EXPECT_NEAR(es.eigenvalues()(0), -2 * rate, 1e-15);
}

TEST(EthGenerator, DetailedBalanceAndStationarity) {
  const auto trimmed = spectrum::round_spectrum(spectrum::diagonalize(spectrum::build_chain({}), spectrum::Window{-5, 5}), 0.2);
  const auto eth = spectrum::make_eth(trimmed, 0.8);
  const auto g = eth_generator(trimmed, eth, {1.0, 1.0}, 4);
  EXPECT_LE(reversibility_residual(g), 1e-10);
  EXPECT_TRUE(g.reversible);
  EXPECT_LE(row_sum_defect(g), 1e-12);
  EXPECT_LE((stationary(g) - g.pi).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(EthGenerator, GaussianSpectrumInsideCheegerSandwich) {
  const auto r = spectrum::round_energies(spectrum::gaussian_quantile_energies(4000, 4.0), 0.5);
  const auto eth = spectrum::make_eth(r, 1.0);
  const auto res = cheeger_check(uniformize(eth_generator(r, eth, {0.5, 1.0}, 1)));
  EXPECT_TRUE(res.holds) << res.lower << " <= " << res.lambda2 << " <= " << res.upper;
}

TEST(MetropolisChain, InfiniteTemperatureUniformWalk) {
  // Interior of a uniform spectrum: nearest-bin symmetric walk.
  const auto r = spectrum::round_energies(spectrum::uniform_energies(2000, -5.0, 5.0), 0.5);
  const auto eth = spectrum::make_eth(r, 0.5);
  const auto c = metropolis_chain(r, eth, 0.0, 0.5, false);
  EXPECT_LE(row_sum_defect(c), 1e-12);
  const int n = c.size();
  for (int i = 2; i + 2 < n; ++i) {
    EXPECT_NEAR(c.kernel(i, i + 1), c.kernel(i, i - 1), 1e-12);
    EXPECT_EQ(c.kernel(i, i + 2), 0.0);
  }
  // Compare with a dense eigensolve of the same kernel.
  Eigen::EigenSolver<RMat> es(c.kernel);
  std::vector<double> ev;
  for (int i = 0; i < n; ++i) ev.push_back(es.eigenvalues()(i).real());
  std::sort(ev.rbegin(), ev.rend());
  EXPECT_NEAR(second_eigenvalue(c), ev[1], 1e-10);
}

TEST(MetropolisChain, DetailedBalanceByConstruction) {
  const auto trimmed = spectrum::round_spectrum(spectrum::diagonalize(spectrum::build_chain({}), spectrum::Window{-5, 5}), 0.2);
  const auto eth = spectrum::make_eth(trimmed, 0.8);
  const auto c = metropolis_chain(trimmed, eth, 0.5, 0.8, false);
  EXPECT_LE(reversibility_residual(c), 1e-12);
  EXPECT_LE((c.pi - spectrum::gibbs_weights(trimmed, 0.5).per_bin).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((stationary(c) - c.pi).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(MetropolisChain, LevelingEqualizesMoveMass) {
  const auto r = spectrum::round_energies(spectrum::gaussian_quantile_energies(20000, 4.0), 0.2);
  const auto eth = spectrum::make_eth(r, 1.0);
  const auto c = metropolis_chain(r, eth, 0.5, 1.0, true);
  RVec move(c.size());
  for (int i = 0; i < c.size(); ++i) move(i) = 1.0 - c.kernel(i, i);
  EXPECT_LE(move.maxCoeff() / move.minCoeff() - 1.0, 0.10);
  EXPECT_LE(reversibility_residual(c), 1e-10);
  EXPECT_LE((stationary(c) - c.pi).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(EigenstateChain, StationaryIsGibbs) {
  const auto model = chain_model(4, false);
  const auto ints = davies::make_interactions(model, "sigma_x_sites", 4);
  const auto c = eigenstate_metropolis_chain(model.eigenvalues, ints.ops, std::vector<double>(4, 0.25), 0.7);
  RVec w = (-0.7 * model.eigenvalues.array()).exp();
  w /= w.sum();
  EXPECT_LE((stationary(c) - w).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE(reversibility_residual(c), 1e-12);
}

TEST(Conductance, TwoStateChain) {
  for (double p : {0.1, 0.25, 0.5}) {
    const auto c = two_state(p, p);
    EXPECT_NEAR(conductance(c, CutFamily::Exhaustive).phi, p, 1e-15);
    EXPECT_NEAR(conductance(c, CutFamily::Contiguous).phi, p, 1e-15);
  }
}

TEST(Conductance, FourRing) {
  SpectralChain c;
  c.labels = RVec::LinSpaced(4, 0, 3);
  c.kernel = RMat::Zero(4, 4);
  for (int i = 0; i < 4; ++i) {
    c.kernel(i, (i + 1) % 4) = 0.25;
    c.kernel(i, (i + 3) % 4) = 0.25;
    c.kernel(i, i) = 0.5;
  }
  c.pi = RVec::Constant(4, 0.25);
  const double phi = conductance(c, CutFamily::Exhaustive).phi;
  EXPECT_NEAR(phi, brute_conductance(c), 1e-15);
  EXPECT_NEAR(phi, 0.25, 1e-15);
}

TEST(Conductance, ContiguousMatchesExhaustiveOnGaussianDensity) {
  DensitySpec s;
  s.half_width = 2.0;
  s.nu0 = 0.25;
  s.variance = 1.0;
  for (double beta : {0.0, 0.5, 1.0}) {
    const auto c = phi_walk(binned_gibbs(s, beta), 0.5);
    ASSERT_LE(c.size(), kMaxExhaustiveStates);
    const double ex = conductance(c, CutFamily::Exhaustive).phi;
    EXPECT_NEAR(ex, brute_conductance(c), 1e-12);
    EXPECT_NEAR(conductance(c, CutFamily::Contiguous).phi, ex, 1e-12);
  }
}

TEST(Conductance, ExhaustiveCapacity) {
  SpectralChain c;
  const int n = kMaxExhaustiveStates + 1;
  c.labels = RVec::LinSpaced(n, 0, n - 1);
  c.kernel = RMat::Identity(n, n);
  c.pi = RVec::Constant(n, 1.0 / n);
  EXPECT_THROW(conductance(c, CutFamily::Exhaustive), CapacityError);
}

TEST(Cheeger, TwoStateClosedForm) {
  const auto res = cheeger_check(two_state(0.25, 0.25));
  EXPECT_NEAR(res.lambda2, 0.5, 1e-15);
  EXPECT_NEAR(res.phi, 0.25, 1e-15);
  EXPECT_NEAR(res.lower, 0.5, 1e-15);
  EXPECT_NEAR(res.upper, 1 - 1.0 / 32, 1e-15);
  EXPECT_TRUE(res.holds);
}

TEST(Cheeger, HundredBinGaussianWalk) {
  DensitySpec s;
  s.half_width = 5.0;
  s.nu0 = 0.1;  // 101 bins
  const auto c = phi_walk(binned_gibbs(s, 0.5), 0.3);
  ASSERT_GE(c.size(), 100);
  const auto res = cheeger_check(c);
  EXPECT_EQ(res.family, CutFamily::Contiguous);
  EXPECT_TRUE(res.holds);
}

TEST(Cheeger, RefusesIrreversibleChain) {
  SpectralChain c;
  c.labels = RVec::LinSpaced(3, 0, 2);
  c.kernel.resize(3, 3);
  c.kernel << 0, 1, 0, 0, 0, 1, 1, 0, 0;  // directed cycle
  c.pi = RVec::Constant(3, 1.0 / 3);
  EXPECT_THROW(cheeger_check(c), ValidationError);
}

TEST(PhiWalk, StationaryIsBinnedGibbs) {
  const auto g = binned_gibbs(DensitySpec{}, 0.5);
  const auto c = phi_walk(g, 0.4);
  EXPECT_LE(row_sum_defect(c), 1e-12);
  EXPECT_LE(reversibility_residual(c), 1e-10);
  EXPECT_LE((stationary(c) - g.pi).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(PhiWalk, FullSpanStepHasOrderOneGap) {
  DensitySpec s;
  s.half_width = 2.0;
  s.nu0 = 0.1;
  const auto g = binned_gibbs(s, 0.5);
  const double span = g.labels(g.labels.size() - 1) - g.labels(0);
  const auto c = phi_walk(g, span);
  EXPECT_GE(1 - second_eigenvalue(c), 0.1);
}

TEST(PhiWalk, BimodalGapCollapses) {
  double prev = 1;
  for (double sep : {4.0, 6.0, 8.0}) {
    DensitySpec s;
    s.kind = "bimodal";
    s.variance = 0.5;
    s.separation = sep;
    s.nu0 = 0.1;
    const double gap = 1 - second_eigenvalue(phi_walk(binned_gibbs(s, 0.0), 0.4));
    EXPECT_LT(gap, 0.1 * prev) << "separation " << sep;
    prev = gap;
  }
}

TEST(PhiWalk, GaussianScalingExponent) {
  const auto res = lambda_rw_scaling(binned_gibbs(DensitySpec{}, 0.5), {0.1, 0.2, 0.4, 0.8});
  EXPECT_NEAR(res.exponent, 2.0, 0.3);
}

TEST(Density, SpecValidation) {
  DensitySpec s;
  s.kind = "lorentzian";
  EXPECT_THROW(s.validate(), ValidationError);
  DensitySpec t;
  t.kind = "table";
  t.energies = {0.0, 1.0};
  t.density = {1.0};
  EXPECT_THROW(t.validate(), ValidationError);
}

// ---------------------------------------------------------------------------

namespace mp = qtherm::metropolis;

TEST(Qpe, EigenvalueOnRegister) {
  RVec e(1);
  e << 0.6;
  mp::QPEModel q;
  q.nu0 = 0.2;
  const auto k = mp::qpe_kraus(spectrum::round_energies(e, 0.2), q);
  ASSERT_EQ(k.size(), 1);
  EXPECT_EQ(k.registers[0], 3);
  EXPECT_DOUBLE_EQ(k.amplitudes[0](0), 1.0);
}

TEST(Qpe, EigenvalueAtMidpoint) {
  RVec e(1);
  e << 0.5;
  mp::QPEModel q;
  q.nu0 = 1.0;
  const auto k = mp::qpe_kraus(spectrum::round_energies(e, 1.0), q);
  ASSERT_EQ(k.size(), 2);
  EXPECT_EQ(k.registers[0], 0);
  EXPECT_EQ(k.registers[1], 1);
  EXPECT_NEAR(k.amplitudes[0](0) * k.amplitudes[0](0), 0.5, 1e-15);
  EXPECT_NEAR(k.amplitudes[1](0) * k.amplitudes[1](0), 0.5, 1e-15);
}

TEST(Qpe, CompletenessAndTwoRegisterSupport) {
  const auto model = chain_model(6);
  const auto r = spectrum::round_spectrum(model, 0.3);
  for (auto mode : {mp::QPEMode::Perfect, mp::QPEMode::TwoBin, mp::QPEMode::TwoBinTail}) {
    mp::QPEModel q;
    q.nu0 = 0.3;
    q.mode = mode;
    q.r_amp = 3;
    const auto k = mp::qpe_kraus(r, q);
    EXPECT_LE(k.completeness_residual(), 1e-12);
    if (mode == mp::QPEMode::TwoBinTail) continue;
    for (int i = 0; i < r.dim(); ++i) {
      int hits = 0;
      for (const RVec& a : k.amplitudes) hits += a(i) != 0.0;
      EXPECT_LE(hits, 2);
    }
  }
}

TEST(Qpe, TailMass) {
  mp::QPEModel q;
  q.mode = mp::QPEMode::TwoBinTail;
  q.r_amp = 2;
  q.c = 0.5;
  EXPECT_DOUBLE_EQ(q.tail_mass(), std::exp(-1.0));
  q.r_amp = 0;
  q.p_amp = 0.1;
  EXPECT_DOUBLE_EQ(q.tail_mass(), 0.1);
  q.mode = mp::QPEMode::TwoBin;
  EXPECT_DOUBLE_EQ(q.tail_mass(), 0.0);
  EXPECT_THROW(mp::parse_qpe_mode("ideal"), ValidationError);
  EXPECT_EQ(mp::parse_qpe_mode(mp::to_string(mp::QPEMode::TwoBinTail)), mp::QPEMode::TwoBinTail);
}

namespace {

struct SmallModel {
  spectrum::SpectralModel model;
  spectrum::RoundedSpectrum r;
  davies::InteractionSet ints;
};

SmallModel small_model(int L = 3, double nu0 = 0.2) {
  SmallModel m;
  m.model = chain_model(L, false);
  m.r = spectrum::round_spectrum(m.model, nu0);
  m.ints = davies::make_interactions(m.model, "sigma_x_sites", L);
  return m;
}

mp::MetropolisMap make_map(const SmallModel& m, mp::QPEMode mode, double beta, int r_rej, double nu0 = 0.2) {
  mp::QPEModel q;
  q.mode = mode;
  q.nu0 = nu0;
  mp::MetropolisConfig cfg;
  cfg.beta = beta;
  cfg.r_rej = r_rej;
  return mp::MetropolisMap(m.r, m.ints, cfg, q);
}

}  // namespace

TEST(Metropolis, UphillPairVanishesAtLowTemperature) {
  const auto m = small_model();
  const auto N = make_map(m, mp::QPEMode::TwoBin, 200.0, 1);
  const auto& k = N.kraus();
  int tested = 0;
  for (int q1 = 0; q1 < k.size(); ++q1)
    for (int q2 = 0; q2 < k.size(); ++q2) {
      if (k.registers[q2] <= k.registers[q1]) continue;
      EXPECT_LE(N.factor(q2, q1), std::exp(-200.0 * 0.2 * 0.99));
      EXPECT_LE(N.pair_superop(q2, q1).matrix().cwiseAbs().maxCoeff(), 1e-15);
      if (++tested > 20) return;
    }
  EXPECT_GT(tested, 0);
}

TEST(Metropolis, SymmetryIdentities) {
  const auto m = small_model();
  for (auto mode : {mp::QPEMode::Perfect, mp::QPEMode::TwoBin}) {
    const auto rep = mp::symmetry_residuals(make_map(m, mode, 0.7, 3));
    EXPECT_GT(rep.pairs, 0);
    EXPECT_LE(rep.acceptance, 1e-10);
    EXPECT_LE(rep.rejection, 1e-10);
  }
}

TEST(Metropolis, PerfectRejectionStaysInMeasuredBin) {
  const auto m = small_model();
  const auto N = make_map(m, mp::QPEMode::Perfect, 0.7, 1);
  const int d = N.dim();
  for (int i = 0; i < d; ++i) {
    Mat E = Mat::Zero(d, d);
    E(i, i) = 1;
    const Mat Y = N.reject(E);
    const auto& bin = m.r.bins[m.r.bin_of[i]];
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        const bool inside = a >= bin.begin && a < bin.end && b >= bin.begin && b < bin.end;
        if (inside) continue;
        EXPECT_LE(std::abs(Y(a, b)), 1e-14);
      }
    if (bin.rank() == 1) {
      EXPECT_LE((Y - Y(i, i) * E).cwiseAbs().maxCoeff(), 1e-14);
    }
  }
}

TEST(Metropolis, ZeroRejectionRounds) {
  const auto m = small_model();
  const auto N = make_map(m, mp::QPEMode::TwoBin, 0.7, 0);
  const auto b = N.materialize();
  EXPECT_EQ(b.rejection.matrix().cwiseAbs().maxCoeff(), 0.0);
  Rng rng(1);
  const Mat rho = random_density(N.dim(), rng);
  EXPECT_NEAR(b.trace_deficit(rho), 1.0 - b.acceptance.apply(rho).trace().real(), 1e-14);
}

TEST(Metropolis, TraceDeficitFallsWithRejectionRounds) {
  const auto m = small_model();
  Rng rng(2);
  std::vector<Mat> probes;
  for (int i = 0; i < 5; ++i) probes.push_back(random_density(m.r.dim(), rng));
  std::vector<double> prev(probes.size(), 2.0);
  for (int r_rej : {0, 1, 2, 4, 8}) {
    const auto b = make_map(m, mp::QPEMode::TwoBin, 0.7, r_rej).materialize();
    for (std::size_t i = 0; i < probes.size(); ++i) {
      const double def = b.trace_deficit(probes[i]);
      EXPECT_LE(def, prev[i] + 1e-12) << "r_rej " << r_rej;
      prev[i] = def;
    }
  }
}

TEST(Metropolis, CompletelyPositiveAndTraceNonIncreasing) {
  const auto m = small_model();
  for (auto mode : {mp::QPEMode::Perfect, mp::QPEMode::TwoBin}) {
    const auto b = make_map(m, mode, 0.7, 2).materialize();
    EXPECT_GE(superop::choi_min_eigenvalue(b.acceptance), -1e-10);
    EXPECT_GE(superop::choi_min_eigenvalue(b.rejection), -1e-10);
    EXPECT_GE(superop::choi_min_eigenvalue(b.total), -1e-10);
    Rng rng(3);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) worst = std::max(worst, 1.0 - b.trace_deficit(random_density(m.r.dim(), rng)));
    EXPECT_LE(worst, 1.0 + 1e-10);
  }
}

TEST(Metropolis, PerfectResolutionIsDetailedBalanced) {
  const auto m = small_model();
  const auto b = make_map(m, mp::QPEMode::Perfect, 0.7, 2).materialize();
  const RVec sigma = mp::reference_state(m.r, {0.2, mp::QPEMode::Perfect}, 0.7);
  EXPECT_LE(mp::epsilon_db(b, sigma, 4, 1).value, 1e-10);
}

TEST(Metropolis, FiniteResolutionBreaksDetailedBalance) {
  const auto m = small_model();
  mp::QPEModel q{0.2, mp::QPEMode::TwoBin};
  const auto b = make_map(m, mp::QPEMode::TwoBin, 0.7, 2).materialize();
  EXPECT_GT(mp::epsilon_db(b, mp::reference_state(m.r, q, 0.7), 4, 1).value, 1e-6);
}

TEST(Metropolis, DiagonalReductionMatchesClassicalChain) {
  // Bins narrower than the level spacing: one eigenstate per bin.
  const auto model = chain_model(4, false);
  double spacing = 1e300;
  for (int i = 1; i < model.size(); ++i) spacing = std::min(spacing, model.eigenvalues(i) - model.eigenvalues(i - 1));
  SmallModel m;
  m.model = model;
  m.r = spectrum::round_spectrum(model, 0.5 * spacing);
  m.ints = davies::make_interactions(model, "sigma_x_sites", 4);
  const auto N = make_map(m, mp::QPEMode::Perfect, 0.5, 1, 0.5 * spacing);
  const auto classical = eigenstate_metropolis_chain(m.r.rounded_energies(), m.ints.ops,
                                                     std::vector<double>(4, 0.25), 0.5);
  EXPECT_LE((mp::diagonal_reduction(N) - classical.kernel).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Metropolis, InfiniteTemperatureFixedPointIsMaximallyMixed) {
  const auto m = small_model();
  const auto N = make_map(m, mp::QPEMode::Perfect, 0.0, 1);
  const int d = N.dim();
  RVec top = RVec::Zero(d);
  top(d - 1) = 1;
  const Mat mixed = Mat::Identity(d, d) / d;
  const auto res = mp::iterate_to_fixed_point(N, diag_state(top), 20000, mixed);
  EXPECT_LE(0.5 * trace_norm_hermitian(res.sigma_fix - mixed), 1e-8);
}

TEST(Metropolis, PerfectFixedPointIsGibbs) {
  const double beta = 0.5;
  SmallModel m;
  m.model = chain_model(6, false);
  m.r = spectrum::round_spectrum(m.model, 0.2);
  m.ints = davies::make_interactions(m.model, "sigma_x_sites", 6);
  const auto N = make_map(m, mp::QPEMode::Perfect, beta, 1);
  const Mat sigma = diag_state(spectrum::gibbs_weights(m.r, beta).rounded_diag);
  const int d = N.dim();
  const auto res = mp::iterate_to_fixed_point(N, Mat::Identity(d, d) / d, 20000, sigma);
  EXPECT_LE(0.5 * trace_norm_hermitian(res.sigma_fix - sigma), 1e-8);
}

TEST(Metropolis, FiniteResolutionFixedPointImprovesUnderRefinement) {
  const double beta = 0.5;
  const auto model = chain_model(4, false);
  const auto ints = davies::make_interactions(model, "sigma_x_sites", 4);
  RVec w = (-beta * model.eigenvalues.array()).exp();
  const Mat sigma = diag_state(w / w.sum());
  double prev = 1e300;
  for (double nu0 : {0.2, 0.1, 0.05, 0.025}) {
    SmallModel m{model, spectrum::round_spectrum(model, nu0), ints};
    const auto N = make_map(m, mp::QPEMode::TwoBin, beta, 2, nu0);
    const int d = N.dim();
    const auto res = mp::iterate_to_fixed_point(N, Mat::Identity(d, d) / d, 50000, sigma);
    EXPECT_LT(res.distance, prev) << "nu0 " << nu0;
    prev = res.distance;
  }
}

TEST(Metropolis, ConfigValidation) {
  mp::MetropolisConfig cfg;
  cfg.r_rej = mp::kMaxRejectionRounds + 1;
  EXPECT_THROW(cfg.validate(1), CapacityError);
  cfg.r_rej = 1;
  cfg.p = {0.5, 0.6};
  EXPECT_THROW(cfg.validate(2), ValidationError);
  cfg.p = {};
  const auto w = cfg.weights(4);
  EXPECT_DOUBLE_EQ(std::accumulate(w.begin(), w.end(), 0.0), 1.0);
}

TEST(Metropolis, MaterializeCapacity) {
  const auto model = chain_model(7);
  const auto r = spectrum::round_spectrum(model, 0.3);
  const auto ints = davies::make_interactions(model, "sigma_x_sites", 7, 1);
  mp::QPEModel q;
  mp::MetropolisConfig cfg;
  const mp::MetropolisMap N(r, ints, cfg, q);
  EXPECT_THROW(N.materialize(), CapacityError);
}
