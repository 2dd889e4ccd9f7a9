// Copyright (c) the kgpencil developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "kgpencil/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace kgp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// RadialGrid

RadialGrid RadialGrid::make(int n, double r_max, double grading) {
  if (n < 1) throw ModelError("RadialGrid: need at least one interior node");
  if (!(r_max > 0.0)) throw ModelError("RadialGrid: r_max must be positive");
  if (!(grading >= 1.0)) throw ModelError("RadialGrid: grading exponent must be >= 1");
  RadialGrid g;
  g.r_max = r_max;
  g.n = n;
  g.grading = grading;
  g.nodes.resize(n);
  for (int i = 1; i <= n; ++i)
    g.nodes[i - 1] = r_max * std::pow(static_cast<double>(i) / (n + 1), grading);
  g.spacings.resize(n + 1);
  g.spacings[0] = g.nodes[0];
  for (int i = 1; i < n; ++i) g.spacings[i] = g.nodes[i] - g.nodes[i - 1];
  g.spacings[n] = r_max - g.nodes[n - 1];
  for (double h : g.spacings)
    if (!(h > 0.0)) throw ModelError("RadialGrid: nodes are not strictly increasing");
  g.lumped_mass.resize(n);
  for (int i = 0; i < n; ++i) g.lumped_mass[i] = 0.5 * (g.spacings[i] + g.spacings[i + 1]);
  return g;
}

// ---------------------------------------------------------------------------
// PotentialSpec

PotentialSpec PotentialSpec::zero() { return PotentialSpec{}; }

PotentialSpec PotentialSpec::coulomb(double ze2) {
  if (!(ze2 > 0.0)) throw ModelError("coulomb potential requires Ze^2 > 0");
  PotentialSpec p;
  p.kind_ = PotentialKind::Coulomb;
  p.ze2_ = ze2;
  return p;
}

PotentialSpec PotentialSpec::gaussian(double depth, double width) {
  if (!(width > 0.0)) throw ModelError("gaussian potential requires width > 0");
  PotentialSpec p;
  p.kind_ = PotentialKind::Gaussian;
  p.depth_ = depth;
  p.width_ = width;
  return p;
}

PotentialSpec PotentialSpec::bounded_table(std::vector<std::pair<double, double>> samples) {
  if (samples.empty()) throw ModelError("bounded_table: no samples");
  for (size_t i = 0; i + 1 < samples.size(); ++i)
    if (!(samples[i].first < samples[i + 1].first))
      throw ModelError("bounded_table: radii must be strictly increasing");
  if (!(samples.front().first >= 0.0)) throw ModelError("bounded_table: negative radius");
  for (auto& [r, v] : samples)
    if (!std::isfinite(v)) throw ModelError("bounded_table: non-finite sample");
  PotentialSpec p;
  p.kind_ = PotentialKind::BoundedTable;
  p.table_ = std::move(samples);
  return p;
}

PotentialSpec PotentialSpec::bounded_table_from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("bounded_table: cannot open " + path);
  std::vector<std::pair<double, double>> samples;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double r, v;
    if (!(ls >> r >> v)) throw ModelError("bounded_table: malformed line '" + line + "'");
    samples.emplace_back(r, v);
  }
  return bounded_table(std::move(samples));
}

PotentialSpec PotentialSpec::shifted(double c) const {
  PotentialSpec p = *this;
  p.shift_ += c;
  return p;
}

double PotentialSpec::operator()(double r) const {
  double base = 0.0;
  switch (kind_) {
    case PotentialKind::Zero:
      base = 0.0;
      break;
    case PotentialKind::Coulomb:
      if (!(r > 0.0)) throw ModelError("coulomb potential evaluated at r <= 0");
      base = -ze2_ / r;
      break;
    case PotentialKind::Gaussian:
      base = depth_ * std::exp(-(r / width_) * (r / width_));
      break;
    case PotentialKind::BoundedTable: {
      if (r <= table_.front().first) {
        base = table_.front().second;  // constant extrapolation
      } else if (r >= table_.back().first) {
        base = table_.back().second;
      } else {
        auto it = std::upper_bound(table_.begin(), table_.end(), r,
                                   [](double x, const auto& s) { return x < s.first; });
        const auto& [r1, v1] = *it;
        const auto& [r0, v0] = *(it - 1);
        base = v0 + (v1 - v0) * (r - r0) / (r1 - r0);
      }
      break;
    }
  }
  const double v = base + shift_;
  if (!std::isfinite(v)) throw ModelError("potential sample is not finite");
  return v;
}

double PotentialSpec::tail_limit() const {
  switch (kind_) {
    case PotentialKind::Zero:
    case PotentialKind::Coulomb:
    case PotentialKind::Gaussian:
      return shift_;
    case PotentialKind::BoundedTable:
      return table_.back().second + shift_;
  }
  return shift_;
}

double PotentialSpec::origin_pole_coefficient() const {
  return kind_ == PotentialKind::Coulomb ? -ze2_ : 0.0;
}

double PotentialSpec::origin_regular_part() const {
  switch (kind_) {
    case PotentialKind::Zero:
      return shift_;
    case PotentialKind::Coulomb:
      return shift_;
    case PotentialKind::Gaussian:
      return depth_ + shift_;
    case PotentialKind::BoundedTable:
      return table_.front().second + shift_;
  }
  return shift_;
}

bool PotentialSpec::rollnik_integrable(std::string* reason) const {
  switch (kind_) {
    case PotentialKind::Coulomb:
      if (reason) *reason = "V^2 ~ r^-2 at the origin; kernel integrand diverges";
      return false;
    case PotentialKind::Zero:
      return true;
    case PotentialKind::Gaussian:
    case PotentialKind::BoundedTable:
      if (shift_ != 0.0 || (kind_ == PotentialKind::BoundedTable && table_.back().second != 0.0)) {
        if (reason) *reason = "nonzero tail: V^2 is not integrable at infinity";
        return false;
      }
      return true;
  }
  return false;
}

double PotentialSpec::suggested_cutoff() const {
  switch (kind_) {
    case PotentialKind::Gaussian:
      return 8.0 * width_;
    case PotentialKind::BoundedTable:
      return table_.back().first;
    default:
      return 1.0;
  }
}

SignHint PotentialSpec::derived_sign_hint(const RadialGrid& grid) const {
  double lo = kInf, hi = -kInf;
  for (double r : grid.nodes) {
    const double v = (*this)(r);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  lo = std::min(lo, tail_limit());
  hi = std::max(hi, tail_limit());
  if (origin_pole_coefficient() < 0.0) lo = -kInf;
  if (origin_pole_coefficient() > 0.0) hi = kInf;
  if (lo >= 0.0) return SignHint::Positive;
  if (hi <= 0.0) return SignHint::Negative;
  return SignHint::Indefinite;
}

void PotentialSpec::check_sign_hint(SignHint hint, const RadialGrid& grid) const {
  if (hint == SignHint::Indefinite) return;
  const SignHint derived = derived_sign_hint(grid);
  if (derived != hint)
    throw ModelError("declared sign hint is inconsistent with sampled potential values");
}

// ---------------------------------------------------------------------------
// RadialProblem and discretization

RadialProblem::RadialProblem(RadialGrid g, PotentialSpec pot, int l_in, double m_in)
    : grid(std::move(g)), potential(std::move(pot)), l(l_in), m(m_in) {
  if (l < 0) throw ModelError("RadialProblem: l must be nonnegative");
  if (!(m > 0.0)) throw ModelError("RadialProblem: mass must be positive");
}

SymMatrix build_h0(const RadialProblem& problem) {
  const RadialGrid& g = problem.grid;
  if (g.n < 8) throw ModelError("build_h0: grid too coarse (N < 8)");
  const int n = g.n;
  const double ll = static_cast<double>(problem.l) * (problem.l + 1);
  const double m2 = problem.m * problem.m;
  std::vector<double> d(n), e(n - 1);
  for (int i = 0; i < n; ++i) {
    const double stiff = 1.0 / g.spacings[i] + 1.0 / g.spacings[i + 1];
    d[i] = stiff / g.lumped_mass[i] + ll / (g.nodes[i] * g.nodes[i]) + m2;
  }
  for (int i = 0; i + 1 < n; ++i)
    e[i] = -1.0 / (g.spacings[i + 1] * std::sqrt(g.lumped_mass[i] * g.lumped_mass[i + 1]));
  SymMatrix h0 = SymMatrix::tridiagonal(std::move(d), std::move(e));
  const double lmin = smallest_eigenvalue(h0);
  if (lmin < m2 - 1e-10 * h0.norm_inf())
    throw ModelError("build_h0: lambda_min(H0) < m^2, discretization is inconsistent");
  return h0;
}

SymMatrix build_v(const RadialProblem& problem) {
  std::vector<double> d(problem.grid.n);
  for (int i = 0; i < problem.grid.n; ++i) d[i] = problem.potential(problem.grid.nodes[i]);
  return SymMatrix::diagonal(std::move(d));
}

// ---------------------------------------------------------------------------
// Najman interval

NajmanBounds najman_q_bounds(const PotentialSpec& potential, double gamma, double m,
                             const RadialGrid& grid) {
  if (!(gamma >= 0.0) || !(gamma < 0.5))
    throw ModelError("najman_q_bounds: need 0 <= gamma < 1/2 in dimension three");
  if (!(m > 0.0)) throw ModelError("najman_q_bounds: mass must be positive");

  NajmanBounds out;
  out.gamma = gamma;
  double q_minus = -kInf;  // sup of eq - sqrt(m^2 + gamma^2/r^2)
  double q_plus = kInf;    // inf of eq + sqrt(m^2 + gamma^2/r^2)
  for (double r : grid.nodes) {
    const double root = std::sqrt(m * m + gamma * gamma / (r * r));
    const double v = potential(r);
    q_minus = std::max(q_minus, v - root);
    q_plus = std::min(q_plus, v + root);
  }
  // tail r -> infinity: sqrt term tends to m
  const double tail = potential.tail_limit();
  q_minus = std::max(q_minus, tail - m);
  q_plus = std::min(q_plus, tail + m);
  // origin r -> 0: eq ~ p/r + reg, sqrt term ~ gamma/r (or m when gamma = 0)
  const double p = potential.origin_pole_coefficient();
  const double reg = potential.origin_regular_part();
  const double minus_strength = p - gamma;
  if (minus_strength > 0.0) {
    q_minus = kInf;  // sup blows up
  } else if (minus_strength == 0.0) {
    q_minus = std::max(q_minus, gamma == 0.0 ? reg - m : reg);
  }
  const double plus_strength = p + gamma;
  if (plus_strength < 0.0) {
    q_plus = -kInf;  // inf blows down
  } else if (plus_strength == 0.0) {
    q_plus = std::min(q_plus, gamma == 0.0 ? reg + m : reg);
  }

  out.q_minus = q_minus;
  out.q_plus = q_plus;
  out.ordered = std::isfinite(q_minus) && std::isfinite(q_plus) && q_minus < q_plus;
  if (!out.ordered) out.reason = "q_- >= q_+: criterion inapplicable for this potential";
  return out;
}

// ---------------------------------------------------------------------------
// discrete positivity of the free resolvent

ResolventPositivity discrete_positivity_resolvent(const SymMatrix& h0, double c) {
  const int n = h0.size();
  SymMatrix shifted = h0;
  for (int i = 0; i < n; ++i) shifted.set(i, i, shifted(i, i) + c);
  LdltFactorization f = ldlt_inertia(shifted);
  if (f.singular()) throw ModelError("discrete_positivity_resolvent: H0 + c is singular");
  ResolventPositivity out;
  out.min_entry = kInf;
  std::vector<double> unit(n, 0.0);
  for (int j = 0; j < n; ++j) {
    unit[j] = 1.0;
    const std::vector<double> col = f.solve_raw(unit);
    unit[j] = 0.0;
    for (double v : col) out.min_entry = std::min(out.min_entry, v);
  }
  out.positive = out.min_entry > 0.0;
  return out;
}

}  // namespace kgp
