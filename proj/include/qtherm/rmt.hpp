#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qtherm/common.hpp"

namespace qtherm::rmt {

// Complex Gaussian block with E[Re g^2] = E[Im g^2] = V/2, so E|g|^2 = V.
struct GaussianBlockSpec {
  int rows = 1;
  int cols = 1;
  double variance = 1.0;
  bool hermitian = false;  // square blocks only; diagonal real with variance V

  void validate() const;
};

Mat sample_block(const GaussianBlockSpec& spec, Rng& rng);
Mat sample_block(const GaussianBlockSpec& spec, std::uint64_t seed);

struct EigenCluster {
  double value = 0;
  int multiplicity = 0;
};

// Eigenvalues of the Gaussian-averaged two-bin map with ranks r1 (upper bin)
// and r2 (lower bin); gp = sum_a gamma(w), gm = sum_a gamma(-w).  Returned in
// the order 0, -V r1 gm, -V r2 gp, -V (r2 gp + r1 gm).
std::vector<EigenCluster> expected_block_map(double V, int r1, int r2, double gp, double gm);

// The same map as a matrix on vec(X11) (+) vec(X22), Heisenberg picture:
// X11 -> gp V (Tr X22 I - r2 X11), X22 -> gm V (Tr X11 I - r1 X22).
Mat expected_sector_map(double V, int r1, int r2, double gp, double gm);

struct NormStats {
  int trials = 0;
  double mean = 0;
  double std_error = 0;
  double q10 = 0, q50 = 0, q90 = 0;
  std::vector<double> samples;
};

NormStats summarize(std::vector<double> samples);

// Largest singular value.
double spectral_norm(const Mat& G);

// ||G|| over `trials` samples of a rows x cols block.
NormStats spectral_norm_mc(int rows, int cols, double V, int trials, std::uint64_t seed);

enum class SumKind { Tensor, Product };
SumKind parse_sum_kind(const std::string& s);

// || sum_i a_i G_i (x) conj(G'_i) || by Lanczos on T^dag T, where
// T(X) = sum_i a_i conj(G'_i) X G_i^T is the same operator on vec(X).
double tensor_sum_norm(const std::vector<Mat>& G, const std::vector<Mat>& Gp,
                       const std::vector<double>& a, Rng& rng);

struct SumRow {
  int count = 0;         // |a|
  double coefficient = 0;  // a_i
  NormStats stats;
};

// For each |a| in `counts`, a_i = scale / |a| and i.i.d. dim x dim blocks of
// variance V.  Trial t of count c draws from stream(seed, c * 1000003 + t).
std::vector<SumRow> sum_concentration_mc(SumKind kind, const std::vector<int>& counts, int dim,
                                         double V, int trials, std::uint64_t seed,
                                         double scale = 1.0);

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace qtherm::rmt
