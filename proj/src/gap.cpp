// Copyright (c) the kgpencil developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "kgpencil/gap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace kgp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;
}  // namespace

double g_of_lambda(const KGPencil& p, double lambda) {
  return smallest_eigenvalue(t_of_lambda(p, lambda));
}

// ---------------------------------------------------------------------------
// form-bound constants

double FormBoundConstants::delta1() const {
  double best = kInf;
  for (const auto& [a, b] : pareto_primed) best = std::min(best, a + b * m);
  return best;
}

double FormBoundConstants::delta2() const {
  double best = kInf;
  for (const auto& [a, b] : pareto) best = std::min(best, std::sqrt(a) + std::sqrt(b) * m);
  return best;
}

double FormBoundConstants::delta3() const {
  double best = kInf;
  for (const auto& [a, b] : pareto) best = std::min(best, std::sqrt(a + b * m * m));
  return best;
}

namespace {

// lambda_max(V^2 - b H0), tridiagonal when V is diagonal
double optimal_a_for(const KGPencil& p, double b) {
  const int n = p.size();
  const SymMatrix& h0 = p.h0();
  const SymMatrix& v = p.v();
  if (h0.band() == Band::Tridiagonal && v.is_diagonal()) {
    std::vector<double> d(n), e(n - 1);
    for (int i = 0; i < n; ++i) d[i] = v.diag()[i] * v.diag()[i] - b * h0.diag()[i];
    for (int i = 0; i + 1 < n; ++i) e[i] = -b * h0.off()[i];
    return largest_eigenvalue(SymMatrix::tridiagonal(std::move(d), std::move(e)));
  }
  const SymMatrix hd = h0.to_dense();
  const SymMatrix vd = v.to_dense();
  SymMatrix w = SymMatrix::dense(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      double v2 = 0.0;
      for (int k = 0; k < n; ++k) v2 += vd(i, k) * vd(k, j);
      w.set(i, j, v2 - b * hd(i, j));
    }
  return largest_eigenvalue(w);
}

double s_norm_of(const KGPencil& p) {
  const LdltFactorization h0f = ldlt_inertia(p.h0());
  const SymMatrix& v = p.v();
  const int n = p.size();
  MatrixAction act = [&](std::span<const double> x, std::span<double> y) {
    std::vector<double> t = v.apply(x);
    t = h0f.solve_raw(t);
    v.apply(t, y);
  };
  const double s2 = largest_sym_eigenvalue(act, n, 1e-12);
  return std::sqrt(std::max(s2, 0.0));
}

}  // namespace

FormBoundConstants form_bound_constants(const KGPencil& p, std::span<const double> b_grid) {
  FormBoundConstants out;
  out.m = p.mass();
  out.s_norm = s_norm_of(p);

  std::vector<double> bs(b_grid.begin(), b_grid.end());
  const double bstar = out.s_norm * out.s_norm * (1.0 + 1e-12);
  if (bstar < 1.0) bs.push_back(bstar);
  std::sort(bs.begin(), bs.end());
  bs.erase(std::unique(bs.begin(), bs.end()), bs.end());

  for (double b : bs) {
    if (!(b >= 0.0) || !(b < 1.0))
      throw GapError("form_bound_constants: b values must lie in [0, 1)");
    const double a = std::max(0.0, optimal_a_for(p, b));
    out.pareto.push_back({a, b});
  }
  // drop pairs dominated by a smaller b with the same (or smaller) a
  std::vector<FormBoundPair> filtered;
  for (const auto& pr : out.pareto) {
    if (!filtered.empty() && pr.a >= filtered.back().a && pr.b >= filtered.back().b) continue;
    filtered.push_back(pr);
  }
  out.pareto = std::move(filtered);
  out.pareto_primed.reserve(out.pareto.size());
  for (const auto& [a, b] : out.pareto)
    out.pareto_primed.push_back({std::sqrt(a), std::sqrt(b)});
  return out;
}

// ---------------------------------------------------------------------------
// damping certificate

namespace {

double lambda_cap(const KGPencil& p) {
  return 10.0 * (p.v_norm_inf() + std::sqrt(p.h0_norm_inf()));
}

}  // namespace

DampingOutcome certify_strong_damping(const KGPencil& p, std::optional<double> hint,
                                      int n_samples, std::uint64_t seed) {
  DampingOutcome out;
  auto try_candidate = [&](double lam) {
    const double g = g_of_lambda(p, lam);
    if (g > 0.0) {
      out.status = DampingStatus::Certified;
      out.lambda0 = lam;
      out.g0 = g;
      return true;
    }
    return false;
  };

  std::vector<double> candidates;
  if (hint) candidates.push_back(*hint);
  candidates.push_back(0.0);
  const double m = p.mass();
  const double s = s_norm_of(p);
  if (s < 1.0) candidates.push_back(0.0);
  if (s < 2.0) {
    candidates.push_back(0.5 * s * m);   // midpoint of the sign-definite intervals
    candidates.push_back(-0.5 * s * m);
  }
  for (double lam : candidates)
    if (try_candidate(lam)) return out;

  // golden-section maximization of the concave g over [-cap, cap]
  const double cap = lambda_cap(p);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = -cap, b = cap;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = g_of_lambda(p, x1), f2 = g_of_lambda(p, x2);
  double best_lam = f1 > f2 ? x1 : x2;
  double best_g = std::max(f1, f2);
  for (int it = 0; it < 120 && best_g <= 0.0; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = g_of_lambda(p, x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = g_of_lambda(p, x1);
    }
    if (f1 > best_g) {
      best_g = f1;
      best_lam = x1;
    }
    if (f2 > best_g) {
      best_g = f2;
      best_lam = x2;
    }
    if (b - a < 1e-12 * std::max(1.0, cap)) break;
  }
  if (best_g > 0.0) {
    out.status = DampingStatus::Certified;
    out.lambda0 = best_lam;
    out.g0 = best_g;
    return out;
  }

  // falsification: sampled root functionals
  const int n = p.size();
  auto check_vector = [&](std::span<const double> x) {
    const RootFunctionalData d = root_functional_data(p, x);
    if (!d.damped_at_x) {
      out.status = DampingStatus::Counterexample;
      out.counterexample.assign(x.begin(), x.end());
      out.counterexample_discriminant = d.discriminant;
      return true;
    }
    return false;
  };

  // the minimizing eigenvector at the best sampled lambda is the natural
  // first suspect
  try {
    const SymMatrix t = t_of_lambda(p, best_lam);
    std::vector<double> start(n, 1.0);
    const auto r = inverse_iteration(t, best_g - 1e-6 * std::max(1.0, std::abs(best_g)),
                                     start, 1e-8, 60);
    if (check_vector(r.vector)) return out;
  } catch (const LinalgError&) {
    // fall through to sampling
  }
  std::vector<double> unit(n, 0.0);
  for (int i = 0; i < n; ++i) {
    unit[i] = 1.0;
    if (check_vector(unit)) return out;
    unit[i] = 0.0;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> x(n);
  for (int rep = 0; rep < n_samples; ++rep) {
    for (double& v : x) v = gauss(rng);
    if (check_vector(x)) return out;
  }
  out.status = DampingStatus::Inconclusive;
  out.note = "g <= 0 at every sampled lambda but no counterexample vector found";
  return out;
}

// ---------------------------------------------------------------------------
// gap endpoints

namespace {

double bisect_g_zero(const KGPencil& p, double lo, double g_lo, double hi, double g_hi,
                     double tol) {
  // g(lo) > 0 > g(hi); lo < hi or lo > hi both supported
  const double soft = 1e-9 * std::max({1.0, std::abs(g_lo), std::abs(g_hi)});
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double gm = g_of_lambda(p, mid);
    // concavity: an interior value may not undercut both bracket values
    if (gm < std::min(g_lo, g_hi) - soft)
      throw GapError("compute_nu: concavity of g violated, inconsistent pencil");
    if (gm > 0.0) {
      lo = mid;
      g_lo = gm;
    } else {
      hi = mid;
      g_hi = gm;
    }
    if (std::abs(hi - lo) <= std::max(1e-4 * tol, 4.0 * std::numeric_limits<double>::epsilon() *
                                                      std::max(1.0, std::abs(mid))))
      break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

NuPair compute_nu(const KGPencil& p, double lambda0, double tol) {
  const double g0 = g_of_lambda(p, lambda0);
  if (!(g0 > 0.0)) throw GapError("compute_nu: g(lambda0) must be positive");
  if (!(tol > 0.0)) throw GapError("compute_nu: tol must be positive");
  const double cap = lambda_cap(p);

  auto expand = [&](double direction) {
    double step = std::max(p.mass(), 1e-3 * cap);
    double prev = lambda0, g_prev = g0;
    for (;;) {
      const double next = lambda0 + direction * step;
      if (std::abs(next - lambda0) > 2.0 * cap)
        throw GapError("compute_nu: no sign change within the lambda cap; root zones nearly touch");
      const double gn = g_of_lambda(p, next);
      if (gn <= 0.0) return std::tuple{prev, g_prev, next, gn};
      prev = next;
      g_prev = gn;
      step *= 2.0;
    }
  };

  auto [lo_p, g_lo_p, hi_p, g_hi_p] = expand(+1.0);
  auto [lo_m, g_lo_m, hi_m, g_hi_m] = expand(-1.0);
  NuPair nu;
  nu.nu_plus = bisect_g_zero(p, lo_p, g_lo_p, hi_p, g_hi_p, tol);
  nu.nu_minus = bisect_g_zero(p, lo_m, g_lo_m, hi_m, g_hi_m, tol);
  return nu;
}

// ---------------------------------------------------------------------------
// a-priori intervals

double berlin_profile_bound(const FormBoundConstants& consts, double lambda) {
  double best = -kInf;
  const double m = consts.m;
  for (const auto& [ap, bp] : consts.pareto_primed) {
    const double t = ap + bp * m + std::abs(lambda);
    best = std::max(best, m * m - t * t);
  }
  return best;
}

std::vector<AprioriInterval> apriori_intervals(const FormBoundConstants& consts, double m,
                                               SignHint sign,
                                               const std::optional<NajmanBounds>& najman,
                                               const std::optional<RollnikResult>& rollnik) {
  std::vector<AprioriInterval> out;
  const double s = consts.s_norm;

  auto push = [&](const std::string& label, bool ok, double lo, double hi,
                  const std::string& reason) {
    AprioriInterval iv;
    iv.label = label;
    iv.applicable = ok;
    if (ok) {
      iv.lo = lo;
      iv.hi = hi;
    } else {
      iv.reason = reason;
    }
    out.push_back(std::move(iv));
  };

  push("real-spec-i", s < 1.0, -m + s * m, m - s * m, "requires ||V H0^{-1/2}|| < 1");
  push("real-spec-ii", sign == SignHint::Positive && s < 2.0, -m + s * m, m,
       sign != SignHint::Positive ? "requires V >= 0" : "requires ||V H0^{-1/2}|| < 2");
  push("real-spec-iii", sign == SignHint::Negative && s < 2.0, -m, m - s * m,
       sign != SignHint::Negative ? "requires V <= 0" : "requires ||V H0^{-1/2}|| < 2");

  const double deltas[3] = {consts.delta1(), consts.delta2(), consts.delta3()};
  const char* names[3] = {"feb28-delta1", "feb28-delta2", "feb28-delta3"};
  for (int i = 0; i < 3; ++i) {
    const double d = deltas[i];
    switch (sign) {
      case SignHint::Positive:
        push(names[i], d < 2.0 * m, -m + d, m, "requires delta < 2m");
        break;
      case SignHint::Negative:
        push(names[i], d < 2.0 * m, -m, m - d, "requires delta < 2m");
        break;
      case SignHint::Indefinite:
        push(names[i], d < m, -m + d, m - d, "requires delta < m");
        break;
    }
  }

  push("berlin-profile", deltas[0] < m, -m + deltas[0], m - deltas[0],
       "requires alpha' + beta' m < m");

  if (najman) {
    push("najman", najman->ordered, najman->q_minus, najman->q_plus,
         najman->reason.empty() ? "q_- >= q_+" : najman->reason);
  } else {
    push("najman", false, 0, 0, "not evaluated (synthetic pencil)");
  }
  if (rollnik) {
    push("rollnik", rollnik->applicable && rollnik->has_gap, rollnik->gap_lo, rollnik->gap_hi,
         rollnik->applicable ? "||V^2||_R >= 4 pi" : rollnik->reason);
  } else {
    push("rollnik", false, 0, 0, "not evaluated");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rollnik norm

double angle_averaged_inv_dist_sq(double r, double s) {
  if (r < 0.0 || s < 0.0) throw GapError("angle_averaged_inv_dist_sq: negative radius");
  if (r == 0.0 && s == 0.0) return kInf;
  if (r == 0.0 || s == 0.0) {
    const double t = std::max(r, s);
    return 1.0 / (t * t);
  }
  if (r == s) return kInf;
  return std::log((r + s) / std::abs(r - s)) / (2.0 * r * s);
}

namespace {

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

// integral of f over [a, b] with precomputed reference nodes
double gl_panel(const std::function<double(double)>& f, double a, double b,
                const std::vector<double>& x, const std::vector<double>& w) {
  if (b <= a) return 0.0;
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) s += w[i] * f(c + h * x[i]);
  return s * h;
}

}  // namespace

double rollnik_pair_integral(const std::function<double(double)>& w1,
                             const std::function<double(double)>& w2, double r_cut,
                             int order) {
  if (!(r_cut > 0.0)) throw GapError("rollnik_pair_integral: cutoff must be positive");
  if (order < 4) throw GapError("rollnik_pair_integral: quadrature order too small");
  std::vector<double> gx, gw;
  gauss_legendre(order, gx, gw);

  // inner integral over s of w2(s) s ln((r+s)/|r-s|), log singularity at s=r
  auto inner = [&](double r) {
    auto f = [&](double s) {
      return w2(s) * s * std::log((r + s) / std::abs(r - s));
    };
    double total = gl_panel(f, 0.0, 0.5 * r, gx, gw);
    // [r/2, r]: s = r - (r/2) tau^2 turns the endpoint log into tau log tau
    {
      const double half = 0.5 * r;
      double acc = 0.0;
      for (size_t i = 0; i < gx.size(); ++i) {
        const double tau = 0.5 * (gx[i] + 1.0);
        const double s = r - half * tau * tau;
        acc += 0.5 * gw[i] * f(s) * 2.0 * half * tau;
      }
      total += acc;
    }
    const double b1 = std::min(2.0 * r, r_cut);
    if (b1 > r) {
      const double len = b1 - r;
      double acc = 0.0;
      for (size_t i = 0; i < gx.size(); ++i) {
        const double tau = 0.5 * (gx[i] + 1.0);
        const double s = r + len * tau * tau;
        acc += 0.5 * gw[i] * f(s) * 2.0 * len * tau;
      }
      total += acc;
    }
    if (r_cut > 2.0 * r) total += gl_panel(f, 2.0 * r, r_cut, gx, gw);
    return total;
  };

  auto outer = [&](double r) { return w1(r) * r * inner(r); };
  double val = gl_panel(outer, 0.0, r_cut, gx, gw);
  return 8.0 * kPi * kPi * val;
}

RollnikResult rollnik_norm(const PotentialSpec& potential, double m, int quad_order) {
  RollnikResult out;
  std::string reason;
  if (!potential.rollnik_integrable(&reason)) {
    out.applicable = false;
    out.reason = reason;
    return out;
  }
  out.applicable = true;
  if (potential.kind() == PotentialKind::Zero && potential.shift() == 0.0) {
    out.norm = 0.0;
    out.has_gap = true;
    out.gap_lo = -m;
    out.gap_hi = m;
    return out;
  }
  const double r_cut = potential.suggested_cutoff();
  auto w = [&](double r) {
    const double v = potential(r);
    return v * v;
  };
  const double norm_sq = rollnik_pair_integral(w, w, r_cut, quad_order);
  out.norm = std::sqrt(std::max(norm_sq, 0.0));
  out.has_gap = out.norm < 4.0 * kPi;
  if (out.has_gap) {
    const double s = std::sqrt(out.norm / (4.0 * kPi));
    out.gap_lo = -m + s * m;
    out.gap_hi = m - s * m;
  }
  return out;
}

}  // namespace kgp
