#pragma once

#include <string>
#include <vector>

#include "qtherm/common.hpp"

namespace qtherm::superop {

inline constexpr int kMaxDenseDim = 64;
// Largest invariant block that is exponentiated directly; bigger blocks are
// integrated with an adaptive Runge-Kutta scheme.
inline constexpr int kMaxExpmBlock = 1024;

// Column-major vectorization: vec(X)[i + d j] = X(i, j).
Vec vec(const Mat& X);
Mat unvec(const Vec& v, int d);

// Inner product on operators.  Trace: Tr[X^dag Y].  Sigma: Tr[X^dag s^1/2 Y
// s^1/2].  SigmaInverse: the same with s^-1/2.  The state s is diagonal in
// the working basis.
struct Metric {
  enum class Kind { Trace, Sigma, SigmaInverse };
  Kind kind = Kind::Trace;
  RVec sigma;

  static Metric trace() { return {}; }
  static Metric weighted(const RVec& s);
  static Metric weighted_inverse(const RVec& s);
  // Diagonal weight W on vectorized operators: <X, Y> = vec(X)^dag W vec(Y).
  RVec weights(int d) const;
};

class Superoperator {
 public:
  Superoperator() = default;
  Superoperator(int d, Mat matrix, std::string basis = "energy");

  static Superoperator identity(int d, std::string basis = "energy");
  static Superoperator zero(int d, std::string basis = "energy");
  // X -> A X B
  static Superoperator sandwich(const Mat& A, const Mat& B, std::string basis = "energy");
  // X -> -i [H, X]
  static Superoperator commutator(const Mat& H, std::string basis = "energy");

  int dim() const { return d_; }
  const Mat& matrix() const { return m_; }
  Mat& matrix() { return m_; }
  const std::string& basis() const { return basis_; }

  bool hermiticity_preserving = false;
  bool trace_preserving = false;  // Tr L[X] = 0 (generator) or Tr X (map), as set by the builder

  Mat apply(const Mat& X) const;

  Superoperator operator+(const Superoperator& o) const;
  Superoperator operator-(const Superoperator& o) const;
  Superoperator operator*(cplx c) const;
  // (*this) after o
  Superoperator after(const Superoperator& o) const;

 private:
  void check_same(const Superoperator& o) const;
  int d_ = 0;
  Mat m_;
  std::string basis_ = "energy";
};

// M += c * (X -> A X B), skipping structural zeros of A and B.
void add_sandwich(Mat& M, const Mat& A, const Mat& B, cplx c);

// Adjoint of a matrix under the diagonal weight w: W^-1 M^dag W.
Mat weighted_adjoint(const Mat& M, const RVec& w);
// W^1/2 M W^-1/2; Hermitian exactly when M is self-adjoint under w.
Mat hermitian_form(const Mat& M, const RVec& w);

Superoperator adjoint(const Superoperator& L, const Metric& metric);

struct Split {
  Superoperator self_adjoint;
  Superoperator anti_self_adjoint;
};
Split hermitian_split(const Superoperator& L, const Metric& metric);

// Relative self-adjointness defect ||L - L^adj||_F / ||L||_F.
double self_adjoint_defect(const Superoperator& L, const Metric& metric);

// Index sets of the connected components of the sparsity graph of M.  Each set
// spans a subspace invariant under M and M^dag.
std::vector<std::vector<int>> invariant_blocks(const Mat& M);

// Eigenvalues sorted by real part, largest first.  With a weight vector the
// matrix is first brought to hermitian_form; if that form is Hermitian to
// 1e-10 (relative) a Hermitian solver is used.
std::vector<cplx> eigenvalues(const Mat& M, const RVec& w);
std::vector<cplx> spectrum_of(const Superoperator& L, const Metric& metric);

// Spectral norm of hermitian_form(M, w).
double weighted_spectral_norm(const Mat& M, const RVec& w);

struct NormEstimate {
  double value = 0;
  bool converged = false;
  Vec best_state;
};

// Lower bound on ||L||_{1->1} from projected ascent over pure states, seeded
// with every basis state and `restarts` random states.
NormEstimate one_one_norm_lower(const Superoperator& L, int restarts, Rng& rng);
// sqrt(d) times the spectral norm of the matrix.
double one_one_norm_upper(const Superoperator& L);

// Choi matrix sum_ij |i><j| (x) L(|i><j|) and its smallest eigenvalue.
Mat choi(const Superoperator& L);
double choi_min_eigenvalue(const Superoperator& L);
// Generator version: smallest eigenvalue of the Choi matrix compressed to the
// complement of the maximally entangled vector.  Non-negative exactly when
// e^{tL} is completely positive for all t >= 0.
double conditional_choi_min_eigenvalue(const Superoperator& L);

// e^{L t_k}[rho0] for ascending times.  Throws if L is flagged trace
// preserving and the trace drifts by more than 1e-6.
std::vector<Mat> evolve(const Superoperator& L, const Mat& rho0, const std::vector<double>& times);

}  // namespace qtherm::superop
