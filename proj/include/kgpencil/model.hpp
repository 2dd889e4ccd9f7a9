// Copyright (c) the kgpencil developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef KGPENCIL_MODEL_HPP
#define KGPENCIL_MODEL_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kgpencil/linalg.hpp"

namespace kgp {

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Radial mesh on (0, r_max) with Dirichlet ends. Interior nodes follow
/// r_i = r_max * (i/(N+1))^g, so g = 1 is the uniform grid and g > 1
/// concentrates nodes at the origin.
struct RadialGrid {
  double r_max = 0.0;
  int n = 0;
  double grading = 1.0;
  std::vector<double> nodes;        // r_1..r_N, strictly increasing, r_1 > 0
  std::vector<double> spacings;     // h_0..h_N including the boundary cells
  std::vector<double> lumped_mass;  // (h_{i-1} + h_i)/2 per interior node

  static RadialGrid make(int n, double r_max, double grading);
};

enum class PotentialKind { Zero, Coulomb, Gaussian, BoundedTable };
enum class SignHint { Negative, Positive, Indefinite };

/// Radial electrostatic profile eq(r). A constant shift c models the
/// replacement V -> V + c; limits at r -> 0 and r -> infinity are declared
/// analytically per kind so that sup/inf criteria can close the grid gaps.
class PotentialSpec {
public:
  static PotentialSpec zero();
  static PotentialSpec coulomb(double ze2);  // eq(r) = -ze2 / r, ze2 > 0
  static PotentialSpec gaussian(double depth, double width);
  static PotentialSpec bounded_table(std::vector<std::pair<double, double>> samples);
  static PotentialSpec bounded_table_from_csv(const std::string& path);

  /// Wrapped copy with eq(r) + c.
  PotentialSpec shifted(double c) const;

  double operator()(double r) const;
  double tail_limit() const;              // lim_{r->inf} eq(r)
  double origin_pole_coefficient() const; // p with eq(r) = p/r + O(1) at 0
  double origin_regular_part() const;     // lim_{r->0} (eq(r) - p/r)

  PotentialKind kind() const { return kind_; }
  double shift() const { return shift_; }
  double coulomb_ze2() const { return ze2_; }
  bool rollnik_integrable(std::string* reason = nullptr) const;
  double suggested_cutoff() const;        // radius beyond which eq - tail is negligible

  SignHint derived_sign_hint(const RadialGrid& grid) const;
  /// Validates a declared hint against sampled values and the limits.
  void check_sign_hint(SignHint hint, const RadialGrid& grid) const;

private:
  PotentialKind kind_ = PotentialKind::Zero;
  double ze2_ = 0.0;
  double depth_ = 0.0, width_ = 1.0;
  std::vector<std::pair<double, double>> table_;
  double shift_ = 0.0;
};

struct RadialProblem {
  RadialGrid grid;
  PotentialSpec potential;
  int l = 0;       // angular momentum sector
  double m = 1.0;  // mass

  RadialProblem(RadialGrid g, PotentialSpec pot, int l_in, double m_in);
};

/// Symmetric tridiagonal discretization of -u'' + l(l+1)/r^2 u + m^2 u with
/// Dirichlet conditions: P1 stiffness with lumped mass, symmetrized by
/// M^{-1/2} A M^{-1/2}. Verifies lambda_min >= m^2.
SymMatrix build_h0(const RadialProblem& problem);

/// Diagonal multiplication operator V_ii = eq(r_i).
SymMatrix build_v(const RadialProblem& problem);

struct NajmanBounds {
  double q_minus = 0.0;
  double q_plus = 0.0;
  double gamma = 0.0;
  bool ordered = false;  // q_minus < q_plus certified
  std::string reason;    // set when the criterion is inapplicable
};

/// Interval endpoints q_-= sup eq - sqrt(m^2 + gamma^2/r^2) and
/// q_+ = inf eq + sqrt(m^2 + gamma^2/r^2), taken over the grid nodes plus
/// the analytic limits at r -> 0 and r -> infinity. Requires
/// 0 <= gamma < 1/2 (dimension three).
NajmanBounds najman_q_bounds(const PotentialSpec& potential, double gamma, double m,
                             const RadialGrid& grid);

struct ResolventPositivity {
  bool positive = false;
  double min_entry = 0.0;
};

/// Entrywise positivity of (H0 + c)^{-1}, the discrete positivity-preserving
/// property of the free resolvent.
ResolventPositivity discrete_positivity_resolvent(const SymMatrix& h0, double c);

}  // namespace kgp

#endif  // KGPENCIL_MODEL_HPP
