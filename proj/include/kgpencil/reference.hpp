// Copyright (c) the kgpencil developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef KGPENCIL_REFERENCE_HPP
#define KGPENCIL_REFERENCE_HPP

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace kgp {

struct ReferenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Coulomb coupling Ze^2 and mass; the closed forms require 0 < Ze^2 < 1/2.
struct CoulombParams {
  double ze2 = 0.0;
  double m = 1.0;
};

struct CoulombLevel {
  int k = 0;               // principal index, k >= 1
  int l = 0;               // angular momentum, 0 <= l <= k-1
  double lambda = 0.0;     // eigenvalue, in (0, m)
  double mu_l = 0.0;       // sqrt((l+1/2)^2 - ze2^2)
  double beta_kl = 0.0;    // 2 sqrt(m^2 - lambda^2)
  int multiplicity = 1;    // 2l + 1
};

/// Bound-state eigenvalue
///   lambda_{k,l} = m (1 + ze2^2 / (k - l - 1/2 + mu_l)^2)^{-1/2}.
CoulombLevel coulomb_eigenvalue(const CoulombParams& params, int k, int l);

/// Kummer confluent hypergeometric 1F1(a, b; z). Terminating cases
/// (a a nonpositive integer) are summed exactly as polynomials; otherwise
/// the series is summed to relative 1e-12 and diverging term growth is an
/// error.
double kummer_1f1(double a, double b, double z);

/// Reduced radial eigenfunction u(r) = r R(r), unnormalized:
///   u(r) = r^(mu_l + 1/2) e^(-beta r / 2) 1F1(l+1-k, 2 mu_l + 1; beta r).
/// The paper's 3D eigenfunction carries ||x||^(mu_l - 1/2); the extra factor
/// r here is the usual 1D reduction u = r R, so the exponent becomes
/// mu_l + 1/2 and u(0) = 0.
double coulomb_radial_value(const CoulombParams& params, const CoulombLevel& level, double r);

/// Samples u on the given nodes, scaled by sqrt of the lumped weights so the
/// result lives in the same discrete space as pencil eigenvectors, and
/// normalized to unit Euclidean norm.
std::vector<double> coulomb_radial_on_grid(const CoulombParams& params,
                                           const CoulombLevel& level,
                                           std::span<const double> nodes,
                                           std::span<const double> lumped_weights);

struct GroundState {
  CoulombLevel level;                      // (k, l) = (1, 0)
  std::function<double(double)> radial;    // unnormalized u(r)
};

GroundState ground_state(const CoulombParams& params);

}  // namespace kgp

#endif  // KGPENCIL_REFERENCE_HPP
