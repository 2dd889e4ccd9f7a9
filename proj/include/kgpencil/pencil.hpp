// Copyright (c) the kgpencil developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef KGPENCIL_PENCIL_HPP
#define KGPENCIL_PENCIL_HPP

#include <optional>
#include <string>
#include <vector>

#include "kgpencil/linalg.hpp"

namespace kgp {

struct PencilError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when a vector certifies that the pencil is not strongly damped:
/// the quadratic (T(.)x, x) has no two distinct real roots.
class NotStronglyDampedError : public PencilError {
public:
  NotStronglyDampedError(std::vector<double> x, double discriminant)
      : PencilError("pencil is not strongly damped at the given vector"),
        counterexample(std::move(x)),
        discriminant(discriminant) {}
  std::vector<double> counterexample;
  double discriminant;
};

enum class PencilProvenance { RadialSector, Synthetic };

/// The Klein-Gordon quadratic pencil T(lambda) = (H0 - V^2) + 2 lambda V
/// - lambda^2 I, held as the matrix triple (H0, V, m). H0 must satisfy
/// lambda_min(H0) >= m^2 up to roundoff; V is symmetric (diagonal in the
/// radial pipeline). Immutable after construction.
class KGPencil {
public:
  KGPencil(SymMatrix h0, SymMatrix v, double m,
           PencilProvenance provenance = PencilProvenance::Synthetic);

  int size() const { return h0_.size(); }
  const SymMatrix& h0() const { return h0_; }
  const SymMatrix& v() const { return v_; }
  double mass() const { return m_; }
  PencilProvenance provenance() const { return provenance_; }

  double h0_norm_inf() const { return h0_norm_; }
  double v_norm_inf() const { return v_norm_; }
  /// Scale used by relative tolerances on T(lambda) entries.
  double scale(double lambda) const;

  /// H0 tridiagonal with nonvanishing subdiagonal and diagonal V: T(lambda)
  /// is an irreducible tridiagonal matrix for every lambda, the discrete
  /// indecomposability hypothesis of the positivity theorems.
  bool irreducible_tridiagonal() const;

private:
  SymMatrix h0_, v_;
  double m_ = 0.0;
  PencilProvenance provenance_ = PencilProvenance::Synthetic;
  double h0_norm_ = 0.0, v_norm_ = 0.0;
};

/// T(lambda) with bandwidth max(bandwidth(H0), bandwidth(V)).
SymMatrix t_of_lambda(const KGPencil& p, double lambda);

/// Quadratic form t(lambda)[x] = (H0 x, x) - ||(V - lambda) x||^2, evaluated
/// without assembling T(lambda); the agreement of the two routes is a
/// cross-check of the discrete form sum.
double t_form(const KGPencil& p, double lambda, std::span<const double> x);

struct RootPair {
  double p_minus = 0.0;
  double p_plus = 0.0;
  double discriminant = 0.0;  // mu(x)^2 + c(x); > 0 iff two distinct real roots
};

struct RootFunctionalData {
  double mu = 0.0;   // (V x, x) / ||x||^2
  double c = 0.0;    // ((H0 - V^2) x, x) / ||x||^2
  double discriminant = 0.0;
  bool damped_at_x = false;
  RootPair roots;    // valid only when damped_at_x
};

/// Roots of t(.)[x] = 0 without throwing; breakdown is reported when the
/// discriminant falls below 1e-14 * max(mu^2, |c|).
RootFunctionalData root_functional_data(const KGPencil& p, std::span<const double> x);

/// Root functionals p_-(x) < p_+(x); throws NotStronglyDampedError with the
/// counterexample vector on breakdown.
RootPair root_functionals(const KGPencil& p, std::span<const double> x);

/// Max-norm of T(lambda) - [T(mu) + 2(lambda-mu)(V - mu) - (lambda-mu)^2].
double shift_identity_residual(const KGPencil& p, double lambda, double mu);

/// Companion factor L(lambda) = I - (S - lambda H0^{-1/2})^T (S - lambda
/// H0^{-1/2}) with S = V H0^{-1/2}, dense. T = H0^{1/2} L H0^{1/2}.
SymMatrix build_l(const KGPencil& p, double lambda);

/// Plain-text symmetric matrix format: dimension header, then the lower
/// triangle row by row, whitespace separated.
SymMatrix load_sym_matrix(const std::string& path);
void save_sym_matrix(const SymMatrix& a, const std::string& path);

}  // namespace kgp

#endif  // KGPENCIL_PENCIL_HPP
