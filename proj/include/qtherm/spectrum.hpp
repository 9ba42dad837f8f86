#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qtherm/common.hpp"

namespace qtherm::spectrum {

inline constexpr int kMaxQubits = 14;

struct SpinChainParams {
  int L = 8;
  double g = 0.9045;
  double h = 0.8090;
  double J = 1.0;
  bool periodic = true;

  void validate() const;
};

// H = g sum X_i + h sum Z_i + J sum Z_i Z_{i+1}.  Qubit 0 is the most
// significant bit of the computational-basis index.  A periodic chain of two
// sites carries the bond twice.
RMat build_chain(const SpinChainParams& p);

// Dense matrix of a Pauli string such as "XIZ" (qubit 0 first).
Mat pauli_string(const std::string& s);

// Pauli string with the given letters placed on `sites` of an L-qubit chain.
std::string place_paulis(int L, const std::vector<int>& sites, const std::string& letters);

using Window = std::pair<double, double>;

struct SpectralModel {
  int dim = 0;       // full Hilbert-space dimension
  RVec eigenvalues;  // retained eigenvalues, ascending
  Mat eigenbasis;    // dim x retained; columns are eigenvectors
  std::optional<Window> truncation;
  double max_residual = 0.0;  // max_i ||H u_i - nu_i u_i|| / ||H||

  int size() const { return static_cast<int>(eigenvalues.size()); }
  // U^dagger op U restricted to retained eigenvectors.
  Mat to_energy_basis(const Mat& op) const;
};

// Window dropping `frac` of the eigenvalues at each end.
Window default_window(const RVec& sorted_eigs, double frac = 0.02);

SpectralModel diagonalize(const Mat& H, std::optional<Window> truncation = std::nullopt);
SpectralModel diagonalize(const RMat& H, std::optional<Window> truncation = std::nullopt);

// Round x to the nearest integer; exact half-integers go toward zero.
long round_half_toward_zero(double x);

struct Bin {
  long k = 0;        // label = k * nu0
  double label = 0;  // energy of the bin
  int begin = 0;     // first eigenindex
  int end = 0;       // one past last eigenindex
  int rank() const { return end - begin; }
};

struct RoundedSpectrum {
  double nu0 = 0;
  RVec energies;  // retained eigenvalues, ascending
  std::vector<Bin> bins;
  std::vector<int> bin_of;  // eigenindex -> bin position
  bool single_bin_warning = false;

  int dim() const { return static_cast<int>(energies.size()); }
  int num_bins() const { return static_cast<int>(bins.size()); }
  // Position of the bin labelled k * nu0, or -1.
  int find(long k) const;
  // Rounded energy of each eigenindex.
  RVec rounded_energies() const;
};

RoundedSpectrum round_spectrum(const SpectralModel& model, double nu0);
RoundedSpectrum round_energies(const RVec& sorted_energies, double nu0);

struct GibbsWeights {
  RVec per_bin;       // rank * exp(-beta label), normalized
  RVec rounded_diag;  // per eigenindex, rounded Gibbs state diagonal
  RVec exact_diag;    // per eigenindex, exp(-beta nu) normalized
};

GibbsWeights gibbs_weights(const RoundedSpectrum& rounded, double beta);

// Box-kernel density estimate at energy nu, normalized to integrate to one.
double box_density(const RVec& energies, double nu, double bandwidth);

// max D(a)/D(b) over bin labels a, b with |a - b| <= window.  Only bins whose
// kernel support lies inside the retained spectrum (and inside `region`, when
// given) take part.
double density_ratio(const RoundedSpectrum& rounded, double window,
                     std::optional<Window> region = std::nullopt);

// Symmetric transition profile |f_w|^2.  Empty table means flat (= 1).
struct FProfile {
  std::vector<double> omega;  // ascending, >= 0
  std::vector<double> value;
  double operator()(double w) const;
};

struct ETHModel {
  double delta_rmt = 1.0;
  FProfile f2;
  RVec energies;
  double bandwidth = 0;
  double R = 1;

  double density(double nu) const { return box_density(energies, nu, bandwidth); }
  // E|A_ij|^2 = |f_w|^2 / (dim D(mu)) for energies nu1, nu2.
  double variance(double nu1, double nu2) const;
};

ETHModel make_eth(const RoundedSpectrum& rounded, double delta_rmt, FProfile f2 = {});

// Synthetic spectra.
RVec uniform_energies(int n, double lo, double hi);
RVec gaussian_quantile_energies(int n, double variance);

}  // namespace qtherm::spectrum
