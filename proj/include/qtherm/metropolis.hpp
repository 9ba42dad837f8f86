#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qtherm/davies.hpp"

namespace qtherm::metropolis {

using spectrum::RoundedSpectrum;
using superop::Superoperator;

enum class QPEMode { Perfect, TwoBin, TwoBinTail };
QPEMode parse_qpe_mode(const std::string& s);
std::string to_string(QPEMode m);

// Finite-resolution energy measurement.  Two-bin splits |alpha|^2 linearly
// between the registers bracketing E; the tail variant mixes in a uniform
// spread of mass p_amp.  When r_amp > 0, p_amp = exp(-c r_amp).
struct QPEModel {
  double nu0 = 0.2;
  QPEMode mode = QPEMode::TwoBin;
  double p_amp = 0.0;
  double r_amp = 0.0;
  double c = 1.0;

  double tail_mass() const;
  void validate() const;
};

// Diagonal measurement operators M_q = sum_i alpha(E_i, q) |i><i|.
struct QPEKraus {
  double nu0 = 0;
  std::vector<long> registers;     // register q has energy registers[q] * nu0
  std::vector<RVec> amplitudes;    // alpha(E_i, q), one vector per register

  int size() const { return static_cast<int>(registers.size()); }
  // max_i |sum_q alpha(E_i, q)^2 - 1|
  double completeness_residual() const;
};

// Perfect mode uses the bins of `r` as registers (M_q = P_q).
QPEKraus qpe_kraus(const RoundedSpectrum& r, const QPEModel& qpe);

struct MetropolisConfig {
  double beta = 1.0;
  std::vector<double> p;  // p(a); empty means uniform
  int r_rej = 1;

  void validate(int count) const;
  std::vector<double> weights(int count) const;
};

inline constexpr int kMaxRejectionRounds = 64;
inline constexpr int kMaxMaterializeDim = superop::kMaxDenseDim;

// Acceptance, rejection and total maps in the Schrodinger picture.
struct CPMapBundle {
  Superoperator acceptance;
  Superoperator rejection;
  Superoperator total;

  // 1 - Tr N[rho]
  double trace_deficit(const Mat& rho) const;
};

// Metropolis step with the first energy register read out classically.
//   acceptance, per register pair: Kraus sqrt(p(a) f_21) M_2 A M_1
//   rejection, finite resolution: for k = 1..r_rej the palindromic path
//     M_1, sqrt(Q_0), (sqrt(P_0), sum_s S(sqrt(Q_s)))^{k-2}, sqrt(P_0),
//     sqrt(Q_0), M_1  (k = 1: M_1, sqrt(Q_0), M_1)
//   with Q_s = A (sum_q f_s(q) M_q^2) A, f_0 = 1 - f, f_1 = f, P_0 = 1 - M_1^2.
//   rejection, perfect resolution: Kraus sqrt(p(a)) sqrt(P_1 Q_0 P_1), which
//     restores the measured eigenspace exactly.
// f_21 = min(1, exp(-beta (q_2 - q_1) nu0)).  Interactions need ||A|| <= 1.
class MetropolisMap {
 public:
  MetropolisMap(const RoundedSpectrum& r, const davies::InteractionSet& ints,
                const MetropolisConfig& cfg, const QPEModel& qpe);

  int dim() const { return d_; }
  const QPEKraus& kraus() const { return kraus_; }
  const QPEModel& qpe() const { return qpe_; }
  const MetropolisConfig& config() const { return cfg_; }

  Mat accept(const Mat& X) const;
  Mat reject(const Mat& X) const;
  Mat apply(const Mat& X) const;
  // A_{q2 q1}: accepted moves from register q1 to q2 (register positions).
  Mat accept_pair(int q2, int q1, const Mat& X) const;
  // R_{q1}: rejection branch after first reading register q1.
  Mat reject_from(int q1, const Mat& X) const;
  // Metropolis factor f(q2, q1).
  double factor(int q2, int q1) const;

  // Dense maps on the full space; throws CapacityError above
  // kMaxMaterializeDim.
  CPMapBundle materialize() const;
  Superoperator pair_superop(int q2, int q1) const;
  Superoperator rejection_superop(int q1) const;

 private:
  struct Term {
    int a = 0;
    double p = 0;
    Mat sqrt_q0, sqrt_q1;  // finite resolution
    Mat sqrt_ideal;        // perfect resolution: sqrt(P_1 Q_0 P_1)
  };
  Mat accept_register(int q1, const Mat& X) const;
  Mat reject_register(int q1, const Mat& X) const;
  Superoperator build(const std::function<Mat(const Mat&)>& f, const std::vector<int>& support) const;
  std::vector<int> support(int q1) const;

  int d_ = 0;
  MetropolisConfig cfg_;
  QPEModel qpe_;
  QPEKraus kraus_;
  std::vector<Mat> ops_;
  std::vector<double> p_;
  std::vector<RMat> accept_weight_;  // per q1: W_ij = sum_q2 f(q2, q1) m2_i m2_j
  std::vector<std::vector<Term>> terms_;  // per q1, per interaction
};

// Population transfer matrix T(i, j) = <j| N[|i><i|] |j>.
RMat diagonal_reduction(const MetropolisMap& N);

// Relative residuals of the symmetry identities over every register pair
// (acceptance) and register (rejection), checked as superoperators.
struct SymmetryReport {
  double acceptance = 0;
  double rejection = 0;
  int pairs = 0;
};
SymmetryReport symmetry_residuals(const MetropolisMap& N);

// Lower-bound estimate of the 1->1 norm of the sigma-anti-self-adjoint part
// of N (adjoint under the sigma^-1 weighted inner product).
superop::NormEstimate epsilon_db(const CPMapBundle& bundle, const RVec& sigma, int restarts,
                                 std::uint64_t seed);

// Reference state for detailed balance: rounded Gibbs weights under perfect
// resolution, exact Gibbs weights otherwise.
RVec reference_state(const RoundedSpectrum& r, const QPEModel& qpe, double beta);

struct FixedPointResult {
  std::vector<double> trace;  // Tr N[rho_k] per step
  std::vector<double> tv;     // (1/2) ||rho_k - sigma_target||_1 per step
  double lambda_lead = 0;
  Mat sigma_fix;
  double distance = 0;        // ||sigma_fix - sigma_target||_1
  int steps = 0;
  double residual = 0;        // ||rho_{k+1} - rho_k||_1 at the end
};

// rho_{k+1} = N[rho_k] / Tr N[rho_k] until successive iterates agree to `tol`
// in trace norm; throws ConvergenceError after ell_max steps.
FixedPointResult iterate_to_fixed_point(const MetropolisMap& N, const Mat& rho0, int ell_max,
                                        const Mat& sigma_target, double tol = 1e-12);

// Largest and second largest eigenvalue (by real part) of the sigma-self-
// adjoint part of N.
std::pair<double, double> leading_eigenvalues(const CPMapBundle& bundle, const RVec& sigma);

}  // namespace qtherm::metropolis
