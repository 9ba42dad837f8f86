#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qtherm/davies.hpp"

namespace qtherm::expander {

using davies::Rates;
using spectrum::RoundedSpectrum;

// Two bins nu1 = k1 nu0 >= nu2 = k2 nu0 and a displacement k' nu0 of the
// second index; k' = 0 is the block-diagonal sector.
struct BlockSector {
  long k1 = 0;
  long k2 = 0;
  long kprime = 0;

  long omega() const { return k1 - k2; }
};

// Operator entries (row, col) of the local space that make up the sector:
// (P_1 X P_1', P_2 X P_2') with b' = b + k'.
struct SectorBlock {
  BlockSector sector;
  std::vector<int> local_index;   // local position -> eigenindex
  std::vector<int> bin_begin;     // local start of bins 1, 2, 1', 2'
  std::vector<int> bin_rank;
  std::vector<std::pair<int, int>> entries;  // local (row, col) of each coordinate
  Mat matrix;    // Heisenberg picture on the listed entries
  RVec weights;  // sqrt(s_row s_col), local Gibbs weights
  std::string basis;

  int size() const { return static_cast<int>(entries.size()); }
  bool diagonal() const { return sector.kprime == 0; }
};

// Local rates: gamma(w) and gamma(-w) for the sector frequency, and the
// inverse temperature that fixes the local Gibbs weights.
struct SectorRates {
  double up = 1.0;    // gamma(w), downhill jump nu1 -> nu2
  double down = 1.0;  // gamma(-w)
  double beta = 0.0;
};
SectorRates sector_rates(const Rates& rates, double omega);

// Largest sector (number of operator coordinates) handed to the dense
// eigensolver.
inline constexpr long kMaxSectorEntries = 8192;

// Generator restricted to a sector, from per-interaction blocks A^a_{21}
// (rows in bin 2, cols in bin 1) and, for k' != 0, A^a_{2'1'}.  The local
// couplings are A(w) = A_21 + A_2'1' and A(-w) = A(w)^dag.
SectorBlock build_sector(const BlockSector& sector, const std::vector<int>& ranks,
                         const std::vector<Mat>& a21, const std::vector<Mat>& a21p,
                         const SectorRates& rates, double nu0);

// Sector generator from a rounded spectrum and interactions in the energy
// basis.
SectorBlock block_lindbladian_diag(const RoundedSpectrum& r, const davies::InteractionSet& ints,
                                   const Rates& rates, const BlockSector& sector);
SectorBlock block_lindbladian_offdiag(const RoundedSpectrum& r, const davies::InteractionSet& ints,
                                      const Rates& rates, const BlockSector& sector);

// Drop every term that couples distinct eigenindex pairs: keep diagonal
// entries and population-to-population transfers.  Idempotent.
SectorBlock hatted_expectation(const SectorBlock& block);

struct ExpanderReport {
  double gap = 0;           // -lambda_2 (diagonal) or -lambda_max (off-diagonal)
  double lambda_top = 0;    // lambda_1 (diagonal, ~0) or lambda_max
  double expected_gap = 0;  // the same for the hatted map
  double deviation = 0;     // || L - E^ L ||_{inf, sigma}
  double ratio = 0;         // deviation / expected_gap
};

ExpanderReport analyze(const SectorBlock& block);

// Eigenvalues of the sector, largest real part first.
std::vector<cplx> sector_eigenvalues(const SectorBlock& block);

// Stationary state of the diagonal sector implied by the rates, as the
// operator P1 s1 + P2 s2 on the local space (trace one).
Mat local_gibbs(const SectorBlock& block);

// Bin containing the median retained energy, and the sector (k1, k1 - w).
BlockSector mid_spectrum_sector(const RoundedSpectrum& r, long omega_k, long kprime = 0);

// Gaussian surrogate blocks with the given ranks: A_21 i.i.d. complex Gaussian
// with variance V for every interaction.
SectorBlock gaussian_sector(const BlockSector& sector, const std::vector<int>& ranks, int count,
                            double V, const SectorRates& rates, double nu0, Rng& rng);

struct ScanPoint {
  int L = 8;
  std::string family = "sigma_x_sites";
  int count = 1;
  double nu0 = 0.5;
  long omega_k = 1;
  long kprime = 0;
  double nu1_offset = 0;  // shift of nu1 from the median, in energy
  std::uint64_t seed = 0; // used by the Gaussian surrogate
  bool gaussian = false;
};

struct ScanRow {
  ScanPoint point;
  ExpanderReport report;
  int rank1 = 0, rank2 = 0;
  std::string error;  // non-empty when the point failed
};

struct ScanConfig {
  double beta = 0;
  bool constant_rates = true;
  double gamma_constant = 1.0;
  double bath_delta = 1.0;
  double V = 1.0;                 // Gaussian surrogate variance
  std::vector<ScanPoint> points;
};

// Evaluates every point; per-point failures are recorded and the scan goes on.
// Chains are diagonalized once per distinct L.  `jobs` worker threads.
std::vector<ScanRow> scan_gaps(const ScanConfig& cfg, int jobs = 1);

}  // namespace qtherm::expander
