#pragma once

#include <string>
#include <vector>

#include "qtherm/bath.hpp"
#include "qtherm/spectrum.hpp"

namespace qtherm::randomwalk {

// Markov chain on energy bins.  Discrete chains carry a row-stochastic kernel
// (K_ij = probability of i -> j); continuous ones a generator with zero row
// sums.
struct SpectralChain {
  RVec labels;  // energy of each state
  RMat kernel;
  RVec pi;      // stationary distribution
  double step = 0;
  bool discrete = true;
  bool reversible = false;

  int size() const { return static_cast<int>(labels.size()); }
  // Throws ValidationError when row sums or pi are off by more than 1e-12.
  void validate() const;
};

double row_sum_defect(const SpectralChain& c);
// max_ij |pi_i K_ij - pi_j K_ji| / max_ij pi_i K_ij over i != j.
double reversibility_residual(const SpectralChain& c);
// Stationary vector from the linear system pi K = pi (or pi G = 0).
RVec stationary(const SpectralChain& c);

// Bin-level chain of the expected true generator: rate i -> j is
// gamma(nu_i - nu_j) |a| rank_j E|A|^2 for 0 < |nu_i - nu_j| <= Delta_RMT.
SpectralChain eth_generator(const spectrum::RoundedSpectrum& r, const spectrum::ETHModel& eth,
                            const bath::BathProfile& b, int count);

// Bin-level Metropolis chain: i -> j with weight rank_j E|A|^2 min(1,
// e^{-beta (nu_j - nu_i)}) inside the window, scaled so the largest proposal
// mass is one; the self-loop takes the rest.  Leveling multiplies row i by
// min_k r(k) / r(i), r the row move mass; the chain then balances against
// pi_i / p_i instead of the Gibbs weights.
SpectralChain metropolis_chain(const spectrum::RoundedSpectrum& r, const spectrum::ETHModel& eth,
                               double beta, double delta_rmt, bool leveling);

// Eigenstate-level Metropolis chain for interactions written in the energy
// basis: i -> j with sum_a p(a) |A^a_ji|^2 min(1, e^{-beta (e_j - e_i)}).
SpectralChain eigenstate_metropolis_chain(const RVec& energies, const std::vector<Mat>& ops,
                                          const std::vector<double>& p, double beta);

// Discrete chain I + G / q with q the largest exit rate.
SpectralChain uniformize(const SpectralChain& generator);

enum class CutFamily { Contiguous, Exhaustive };

struct Cut {
  double phi = 0;
  std::vector<int> set;
};

inline constexpr int kMaxExhaustiveStates = 20;

// min over admissible A with pi(A) <= 1/2 of Q(A -> A^c) / pi(A).  Contiguous
// cuts are intervals of consecutive states.
Cut conductance(const SpectralChain& c, CutFamily family);

// Second largest eigenvalue of a reversible discrete chain.
double second_eigenvalue(const SpectralChain& c);

struct CheegerResult {
  double lambda2 = 0;
  double phi = 0;
  double lower = 0;  // 1 - 2 phi
  double upper = 0;  // 1 - phi^2 / 2
  bool holds = false;
  CutFamily family = CutFamily::Exhaustive;
};

// Refuses (ValidationError) chains that are not reversible to 1e-10.
// Exhaustive cuts up to kMaxExhaustiveStates states, contiguous above.
CheegerResult cheeger_check(const SpectralChain& c);

// Binned Gibbs measure on a synthetic or tabulated density of states.
struct DensitySpec {
  std::string kind = "truncated-gaussian";  // truncated-gaussian | bimodal | table
  double variance = 4.0;
  double half_width = 8.0;
  double nu0 = 0.02;
  double separation = 0.0;  // bimodal: distance between the two centres
  std::vector<double> energies;  // table
  std::vector<double> density;   // table

  void validate() const;
};

struct BinnedGibbs {
  RVec labels;
  RVec pi;
  double nu0 = 0;
};

BinnedGibbs binned_gibbs(const DensitySpec& spec, double beta);
BinnedGibbs binned_gibbs(const spectrum::RoundedSpectrum& r, double beta);

// Heat-bath walk averaging the pair conditional expectations within
// Delta_RMT: from i, pick one of m = 2 floor(Delta / nu0) displacements; the
// pair {i, j} is then resampled from pi restricted to it.  Displacements
// leaving the spectrum keep the state.
SpectralChain phi_walk(const BinnedGibbs& g, double delta_rmt);

struct ScalingRow {
  double delta_rmt = 0;
  double phi = 0;
  double lambda2 = 0;
  double gap = 0;  // 1 - lambda2
};

struct ScalingResult {
  std::vector<ScalingRow> rows;
  double exponent = 0;  // slope of log gap against log Delta_RMT
};

ScalingResult lambda_rw_scaling(const BinnedGibbs& g, const std::vector<double>& grid);

}  // namespace qtherm::randomwalk
