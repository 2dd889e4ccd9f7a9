// Copyright (c) the kgpencil developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef KGPENCIL_GAP_HPP
#define KGPENCIL_GAP_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kgpencil/model.hpp"
#include "kgpencil/pencil.hpp"

namespace kgp {

struct GapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Smallest eigenvalue of T(lambda); concave in lambda, positive exactly on
/// the spectral gap (nu_-, nu_+).
double g_of_lambda(const KGPencil& p, double lambda);

struct FormBoundPair {
  double a = 0.0;
  double b = 0.0;
};

/// Certified relative-bound constants: for each pair,
/// ||Vx||^2 <= a ||x||^2 + b ||H0^{1/2} x||^2 with a = max(0,
/// lambda_max(V^2 - b H0)). Primed pairs (sqrt a, sqrt b) serve the norm
/// version ||Vx|| <= a' ||x|| + b' ||H0^{1/2} x||.
struct FormBoundConstants {
  std::vector<FormBoundPair> pareto;         // b ascending
  std::vector<FormBoundPair> pareto_primed;  // (sqrt a, sqrt b)
  double s_norm = 0.0;                       // ||V H0^{-1/2}||
  double m = 0.0;

  double delta1() const;  // min a' + b' m
  double delta2() const;  // min sqrt(a) + sqrt(b) m
  double delta3() const;  // min sqrt(a + b m^2)
};

/// Computes the pairs over the given b grid (values in [0,1)); b = s_norm^2
/// is appended so the Pareto set contains the norm-optimal point. s_norm is
/// computed independently as the square root of lambda_max(V H0^{-1} V).
FormBoundConstants form_bound_constants(const KGPencil& p, std::span<const double> b_grid);

enum class DampingStatus { Certified, Counterexample, Inconclusive };

struct DampingOutcome {
  DampingStatus status = DampingStatus::Inconclusive;
  double lambda0 = 0.0;  // certificate point with g(lambda0) > 0
  double g0 = 0.0;
  std::vector<double> counterexample;      // vector with nonpositive discriminant
  double counterexample_discriminant = 0.0;
  std::string note;
};

/// Searches for a point lambda0 with T(lambda0) positive definite, which
/// certifies strong damping. Candidates: the hint, 0, cheap a-priori
/// midpoints, then a golden-section maximization of the concave g. On
/// failure, sampled root functionals hunt for a counterexample vector.
DampingOutcome certify_strong_damping(const KGPencil& p, std::optional<double> hint,
                                      int n_samples, std::uint64_t seed = 42);

struct NuPair {
  double nu_minus = 0.0;
  double nu_plus = 0.0;
};

/// Gap endpoints as the two zeros of the concave g bracketing lambda0;
/// requires g(lambda0) > 0. Outward expansion is capped at
/// 10 (||V|| + sqrt(||H0||)), past every root zone.
NuPair compute_nu(const KGPencil& p, double lambda0, double tol);

struct AprioriInterval {
  std::string label;
  double lo = 0.0;
  double hi = 0.0;
  bool applicable = false;
  std::string reason;  // failed precondition when inapplicable
};

struct RollnikResult {
  bool applicable = false;
  std::string reason;
  double norm = 0.0;      // ||V^2||_R
  bool has_gap = false;   // norm < 4 pi
  double gap_lo = 0.0;
  double gap_hi = 0.0;
};

/// The labeled a-priori spectral-gap intervals: the three operator-norm
/// criteria (s < 1; sign-definite V with s < 2), the delta_1..delta_3
/// corollary bounds, the Berlin semi-boundedness profile, and the optional
/// Najman and Rollnik entries computed elsewhere.
std::vector<AprioriInterval> apriori_intervals(const FormBoundConstants& consts, double m,
                                               SignHint sign,
                                               const std::optional<NajmanBounds>& najman,
                                               const std::optional<RollnikResult>& rollnik);

/// Angular average of 1/|x-y|^2 over directions at radii r and s:
/// (1/(4 pi)) int dOmega 1/|x-y|^2 = ln((r+s)/|r-s|) / (2 r s).
double angle_averaged_inv_dist_sq(double r, double s);

/// Radial reduction of int int w1(|x|) w2(|y|) / |x-y|^2 dx dy on [0, r_cut],
/// Gauss-Legendre with the log singularity absorbed by a quadratic
/// substitution at the diagonal.
double rollnik_pair_integral(const std::function<double(double)>& w1,
                             const std::function<double(double)>& w2, double r_cut,
                             int order);

/// Rollnik norm of the profile V^2 and the induced gap when ||V^2||_R < 4 pi.
RollnikResult rollnik_norm(const PotentialSpec& potential, double m, int quad_order);

/// Lower envelope m^2 - (a' + b' m + |lambda|)^2 maximized over the primed
/// pairs; g must dominate it pointwise.
double berlin_profile_bound(const FormBoundConstants& consts, double lambda);

struct GapReport {
  double nu_minus = 0.0;
  double nu_plus = 0.0;
  DampingOutcome damping;
  FormBoundConstants constants;
  std::vector<AprioriInterval> intervals;
  std::vector<std::pair<double, double>> g_profile;  // (lambda, g)
};

}  // namespace kgp

#endif  // KGPENCIL_GAP_HPP
