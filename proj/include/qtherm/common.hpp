#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qtherm {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

// Bad input: wrong shape, non-Hermitian operator, out-of-range parameter.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Request exceeds a dense-storage or cost guard.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Iterative routine stopped before reaching its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

// Independent stream for trial `index` under `root`.  Streams are keyed by
// counter so parallel trials never share generator state.
inline Rng stream(std::uint64_t root, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(root), static_cast<std::uint32_t>(root >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x71u};
  return Rng(seq);
}

// Haar-random pure state of dimension d.
Vec random_state(int d, Rng& rng);

// Random density matrix (Hilbert-Schmidt measure).
Mat random_density(int d, Rng& rng);

// Trace norm of a Hermitian matrix.
double trace_norm_hermitian(const Mat& X);

// ||A - A^dagger||_max.
double hermiticity_defect(const Mat& A);

}  // namespace qtherm
