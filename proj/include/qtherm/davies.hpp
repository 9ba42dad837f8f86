#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qtherm/bath.hpp"
#include "qtherm/spectrum.hpp"
#include "qtherm/superop.hpp"

namespace qtherm::davies {

using spectrum::RoundedSpectrum;
using superop::Superoperator;

// Hermitian couplings A^a written in the energy eigenbasis of the system.
struct InteractionSet {
  std::vector<Mat> ops;
  std::string label;

  int count() const { return static_cast<int>(ops.size()); }
  void validate() const;
};

// Pauli strings of a named family on an L-site ring: "sigma_x_sites" (X on each
// site), "xxx", "zzz", "xyz" (three neighbouring sites).
std::vector<std::string> family_strings(const std::string& family, int L);

InteractionSet from_pauli_strings(const spectrum::SpectralModel& model,
                                  const std::vector<std::string>& strings, std::string label);

// First `count` members of a family (all members when count < 0).
InteractionSet make_interactions(const spectrum::SpectralModel& model, const std::string& family,
                                 int L, int count = -1);

// gamma(w) from a bath profile, or a constant when no profile is set.
struct Rates {
  std::optional<bath::BathProfile> bath;
  double constant = 1.0;

  double operator()(double w) const { return bath ? bath::gamma(*bath, w) : constant; }
};

// A(w) for w = k nu0: blocks P_b2 A P_b1 with k1 - k2 = k.
Mat fourier_component(const Mat& A, const RoundedSpectrum& r, long k);

// All k for which some pair of present bins differs by k.
std::vector<long> present_frequencies(const RoundedSpectrum& r);

struct DaviesOptions {
  bool lamb_shift = false;
  bool system_hamiltonian = false;  // add the rounded system Hamiltonian term
  double lambda2 = 1.0;             // weight of the Lamb shift
  // Keep only Bohr frequencies k for which this returns true.
  std::function<bool(long)> keep_frequency;
};

struct TrueGeneratorConfig {
  int m = 1;  // coherence width in units of nu0

  void validate() const;
};

// Heisenberg-picture dissipator with Bohr frequencies coupled up to m nu0 and
// Boltzmann weights on the two anticommutator halves.  m = 0 gives the
// rounded dissipator.
Superoperator dissipator_heisenberg(const RoundedSpectrum& r, const InteractionSet& ints,
                                    const Rates& rates, int m,
                                    const std::function<bool(long)>& keep = {});

// Rounded Davies generator, Schrodinger picture.
Superoperator rounded_davies(const RoundedSpectrum& r, const InteractionSet& ints, const Rates& rates,
                             const DaviesOptions& opts = {});

// Finite-time dissipator D', Schrodinger picture.  Not completely positive in
// general.
Superoperator true_dissipator(const RoundedSpectrum& r, const InteractionSet& ints,
                              const Rates& rates, const TrueGeneratorConfig& cfg);

// sum_{|k - k'| <= m} S(k nu0, k' nu0) A^dag(k') A(k); m = 0 gives the rounded
// Lamb shift.
Mat lamb_shift_hamiltonian(const RoundedSpectrum& r, const InteractionSet& ints,
                           const bath::BathProfile& b, int m);

struct LambResidual {
  double commutator_norm = 0;  // || [H_LS, sigma] ||_1
  double self_adjoint_norm = 0;  // Frobenius norm of the sigma-self-adjoint part of i[H_LS, .]
};

LambResidual lamb_shift_residual(const RoundedSpectrum& r, const InteractionSet& ints,
                                 const bath::BathProfile& b, const TrueGeneratorConfig& cfg);

struct LambScalingRow {
  double nu0 = 0;
  LambResidual residual;
};

std::vector<LambScalingRow> lamb_shift_scaling(const spectrum::SpectralModel& model,
                                               const InteractionSet& ints, const bath::BathProfile& b,
                                               const TrueGeneratorConfig& cfg,
                                               const std::vector<double>& nu0_grid);

struct StructureReport {
  double trace_residual = 0;     // max |D[I]| in the Heisenberg picture
  double detailed_balance = 0;   // relative sigma-self-adjointness defect (Heisenberg)
  double fixed_point = 0;        // max |L[sigma]| in the Schrodinger picture
};

StructureReport check_structure(const Superoperator& schrodinger, const RVec& sigma);

// Largest and second largest eigenvalue real parts of a Schrodinger generator
// that is detailed balanced with respect to sigma.  gap = -lambda_2.
struct GapInfo {
  double lambda1 = 0;
  double lambda2 = 0;
  double gap() const { return -lambda2; }
};
GapInfo generator_gap(const Superoperator& schrodinger, const RVec& sigma);

// 2 gap / (ln ||sigma^-1|| + 2).
double mlsi_lower_bound(double gap, const RVec& sigma);

struct ConvergenceCurve {
  std::vector<double> times;
  std::vector<double> distance;  // || rho(t) - sigma ||_1
  double fitted_rate = 0;        // from the exponential tail; NaN if not enough points
};

ConvergenceCurve converge_to_gibbs(const Superoperator& L, const Mat& rho0, const Mat& sigma,
                                   const std::vector<double>& times);

// Rate of the exponential tail of a decaying curve.
double fit_decay_rate(const std::vector<double>& t, const std::vector<double>& y, double lo = 1e-10,
                      double hi = 1e-1);

}  // namespace qtherm::davies
