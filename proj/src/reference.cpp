// Copyright (c) the kgpencil developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "kgpencil/reference.hpp"

#include <cmath>
#include <limits>

namespace kgp {

namespace {

void check_params(const CoulombParams& p) {
  if (!(p.ze2 > 0.0) || !(p.ze2 < 0.5))
    throw ReferenceError("coulomb closed forms require 0 < Ze^2 < 1/2");
  if (!(p.m > 0.0)) throw ReferenceError("coulomb closed forms require m > 0");
}

bool is_nonpositive_integer(double a, long& value) {
  const double r = std::round(a);
  if (r > 0.5 || std::abs(a - r) > 1e-12 * std::max(1.0, std::abs(a))) return false;
  value = static_cast<long>(r);
  return true;
}

}  // namespace

CoulombLevel coulomb_eigenvalue(const CoulombParams& params, int k, int l) {
  check_params(params);
  if (k < 1 || l < 0 || l > k - 1)
    throw ReferenceError("coulomb_eigenvalue: need k >= 1 and 0 <= l <= k-1");
  CoulombLevel lev;
  lev.k = k;
  lev.l = l;
  lev.mu_l = std::sqrt((l + 0.5) * (l + 0.5) - params.ze2 * params.ze2);
  const double denom = (k - l - 0.5) + lev.mu_l;
  lev.lambda = params.m / std::sqrt(1.0 + params.ze2 * params.ze2 / (denom * denom));
  lev.beta_kl = 2.0 * std::sqrt(params.m * params.m - lev.lambda * lev.lambda);
  lev.multiplicity = 2 * l + 1;
  return lev;
}

double kummer_1f1(double a, double b, double z) {
  long bint;
  if (is_nonpositive_integer(b, bint))
    throw ReferenceError("kummer_1f1: b must not be a nonpositive integer");
  long aint;
  if (is_nonpositive_integer(a, aint)) {
    // terminating polynomial of degree -aint, summed exactly
    const long degree = -aint;
    double sum = 1.0, term = 1.0;
    for (long n = 0; n < degree; ++n) {
      term *= (a + n) * z / ((b + n) * (n + 1));
      sum += term;
    }
    return sum;
  }
  double sum = 1.0, term = 1.0;
  double prev_mag = std::numeric_limits<double>::infinity();
  for (long n = 0; n < 20000; ++n) {
    term *= (a + n) * z / ((b + n) * (n + 1));
    sum += term;
    const double mag = std::abs(term);
    if (mag <= 1e-12 * std::abs(sum) && prev_mag <= 1e-12 * std::abs(sum)) return sum;
    if (!std::isfinite(sum) || mag > 1e280)
      throw ReferenceError("kummer_1f1: series overflow outside its useful range");
    prev_mag = mag;
  }
  throw ReferenceError("kummer_1f1: series did not converge in 20000 terms");
}

double coulomb_radial_value(const CoulombParams&, const CoulombLevel& level, double r) {
  if (r < 0.0) throw ReferenceError("coulomb_radial_value: r must be >= 0");
  if (r == 0.0) return 0.0;
  const double a = static_cast<double>(level.l + 1 - level.k);
  const double b = 2.0 * level.mu_l + 1.0;
  return std::pow(r, level.mu_l + 0.5) * std::exp(-level.beta_kl * r / 2.0) *
         kummer_1f1(a, b, level.beta_kl * r);
}

std::vector<double> coulomb_radial_on_grid(const CoulombParams& params,
                                           const CoulombLevel& level,
                                           std::span<const double> nodes,
                                           std::span<const double> lumped_weights) {
  if (nodes.size() != lumped_weights.size())
    throw ReferenceError("coulomb_radial_on_grid: nodes/weights mismatch");
  std::vector<double> u(nodes.size());
  for (size_t i = 0; i < nodes.size(); ++i)
    u[i] = std::sqrt(lumped_weights[i]) * coulomb_radial_value(params, level, nodes[i]);
  double nrm = 0.0;
  for (double v : u) nrm += v * v;
  nrm = std::sqrt(nrm);
  if (nrm == 0.0) throw ReferenceError("coulomb_radial_on_grid: vanishing sample");
  for (double& v : u) v /= nrm;
  return u;
}

GroundState ground_state(const CoulombParams& params) {
  GroundState g;
  g.level = coulomb_eigenvalue(params, 1, 0);
  g.radial = [params, level = g.level](double r) {
    return coulomb_radial_value(params, level, r);
  };
  return g;
}

}  // namespace kgp
