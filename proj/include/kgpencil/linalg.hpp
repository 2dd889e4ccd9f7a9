// Copyright (c) the kgpencil developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef KGPENCIL_LINALG_HPP
#define KGPENCIL_LINALG_HPP

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kgp {

struct LinalgError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotSpdError : LinalgError {
  using LinalgError::LinalgError;
};
struct SingularFactorError : LinalgError {
  using LinalgError::LinalgError;
};
struct ConvergenceError : LinalgError {
  using LinalgError::LinalgError;
};

enum class Band { Full, Tridiagonal };

/// Real symmetric matrix. Symmetry holds by construction: full matrices
/// store the lower triangle packed row-wise, tridiagonal ones the diagonal
/// and the subdiagonal.
class SymMatrix {
public:
  SymMatrix() = default;

  static SymMatrix dense(int n);
  static SymMatrix tridiagonal(std::vector<double> diag, std::vector<double> off);
  static SymMatrix diagonal(std::vector<double> diag);
  static SymMatrix identity(int n);

  int size() const { return n_; }
  Band band() const { return band_; }
  /// True for tridiagonal storage with a vanishing subdiagonal.
  bool is_diagonal() const;

  double operator()(int i, int j) const;
  void set(int i, int j, double value);

  const std::vector<double>& diag() const;
  const std::vector<double>& off() const;
  const std::vector<double>& packed_lower() const;

  void apply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> apply(std::span<const double> x) const;
  double quad_form(std::span<const double> x) const;  // x^T A x

  double norm_inf() const;
  SymMatrix to_dense() const;

private:
  int n_ = 0;
  Band band_ = Band::Tridiagonal;
  std::vector<double> lower_;  // packed, index i*(i+1)/2 + j, j <= i
  std::vector<double> d_, e_;
};

struct Inertia {
  int n_neg = 0;
  int n_zero = 0;
  int n_pos = 0;
  int total() const { return n_neg + n_zero + n_pos; }
  bool operator==(const Inertia&) const = default;
};

struct EigenDecomposition {
  std::vector<double> values;                 // ascending
  std::vector<std::vector<double>> vectors;   // vectors[k] pairs with values[k]
};

/// Eigenvalues (and optionally orthonormal eigenvectors) of the symmetric
/// tridiagonal matrix with diagonal d and subdiagonal e, by the implicit
/// QL algorithm with Wilkinson shifts. Throws ConvergenceError after 50
/// sweeps on a single eigenvalue.
EigenDecomposition tridiag_eigen(std::span<const double> d, std::span<const double> e,
                                 bool want_vectors = false);

/// Full symmetric eigendecomposition. Dense matrices are reduced to
/// tridiagonal form by Householder reflections first.
EigenDecomposition sym_eigen(const SymMatrix& a, bool want_vectors = false);

/// Symmetric indefinite factorization handle. Dense matrices are factored
/// as P A P^T = L D L^T with Bunch-Kaufman 1x1/2x2 pivoting; tridiagonal
/// ones keep an LU factorization with partial pivoting for solves and a
/// Sturm-type recurrence for the inertia. Immutable after creation.
class LdltFactorization {
public:
  const Inertia& inertia() const { return inertia_; }
  double log_abs_det() const { return log_abs_det_; }
  int det_sign() const { return det_sign_; }   // 0 when a pivot fell below the zero threshold
  bool singular() const { return singular_; }
  int size() const { return n_; }
  double zero_threshold() const { return zero_tol_; }

  /// Solves A x = b without refinement; throws SingularFactorError.
  std::vector<double> solve_raw(std::span<const double> b) const;

private:
  friend LdltFactorization ldlt_inertia(const SymMatrix&);
  friend std::vector<double> solve_with_factor(const LdltFactorization&,
                                               std::span<const double>);
  int n_ = 0;
  Band band_ = Band::Full;
  Inertia inertia_;
  double log_abs_det_ = 0.0;
  int det_sign_ = 1;
  bool singular_ = false;
  double zero_tol_ = 0.0;
  SymMatrix a_;                  // retained for iterative refinement
  // dense Bunch-Kaufman data
  std::vector<double> bk_;       // packed lower factors
  std::vector<int> pivot_;       // LAPACK-style ipiv
  // tridiagonal LU data (partial pivoting, two superdiagonals)
  std::vector<double> lu_dl_, lu_d_, lu_du_, lu_du2_;
  std::vector<int> lu_piv_;
};

/// Factorization plus inertia of a symmetric matrix. Pivot blocks of
/// magnitude below 1e-14 * ||A||_inf count toward n_zero and zero the
/// determinant sign.
LdltFactorization ldlt_inertia(const SymMatrix& a);

/// Solve with a factorization handle, followed by one step of iterative
/// refinement against the retained matrix.
std::vector<double> solve_with_factor(const LdltFactorization& f, std::span<const double> b);

struct InverseIterationResult {
  std::vector<double> vector;   // unit norm
  double rayleigh = 0.0;
  int iterations = 0;
};

/// Inverse iteration with a fixed shift; returns the normalized eigenvector
/// and its Rayleigh quotient once ||(A - mu I) x|| <= tol * ||A||_inf.
/// Throws ConvergenceError on stagnation.
InverseIterationResult inverse_iteration(const SymMatrix& a, double shift,
                                         std::span<const double> start, double tol,
                                         int max_iter);

using MatrixAction = std::function<void(std::span<const double>, std::span<double>)>;

/// Largest eigenvalue of a symmetric positive semidefinite action, by
/// Lanczos with full reorthogonalization and a deterministic start vector.
double largest_sym_eigenvalue(const MatrixAction& apply, int n, double tol);

struct SqrtPair {
  SymMatrix sqrt;
  SymMatrix inv_sqrt;
};

/// Dense square root and inverse square root of an SPD matrix via full
/// eigendecomposition. Throws NotSpdError when lambda_min <= 1e-12 * ||A||.
SqrtPair sym_sqrt_and_invsqrt(const SymMatrix& a);

/// Number of eigenvalues of A strictly below sigma (inertia of A - sigma I).
int count_eigenvalues_below(const SymMatrix& a, double sigma);

/// Extremal eigenvalues by bisection on inertia counts.
double smallest_eigenvalue(const SymMatrix& a);
double largest_eigenvalue(const SymMatrix& a);

// small vector helpers shared across the modules
double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
void normalize(std::span<double> x);

}  // namespace kgp

#endif  // KGPENCIL_LINALG_HPP
