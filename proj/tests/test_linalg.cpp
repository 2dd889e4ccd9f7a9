// Copyright (c) the kgpencil developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "kgpencil/linalg.hpp"

#include <cmath>
#include <random>

#include "doctest.h"

using namespace kgp;

namespace {

std::mt19937_64 rng_for(const char* tag) {
  std::seed_seq seq(tag, tag + std::char_traits<char>::length(tag));
  return std::mt19937_64(seq);
}

SymMatrix random_dense(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> uni(-scale, scale);
  SymMatrix a = SymMatrix::dense(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) a.set(i, j, uni(rng));
  return a;
}

SymMatrix random_spd(int n, std::mt19937_64& rng) {
  // G^T G + small ridge
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<std::vector<double>> g(n, std::vector<double>(n));
  for (auto& row : g)
    for (double& v : row) v = uni(rng);
  SymMatrix a = SymMatrix::dense(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += g[k][i] * g[k][j];
      a.set(i, j, s + (i == j ? 0.05 : 0.0));
    }
  return a;
}

double eigen_residual(const SymMatrix& a, const std::vector<double>& v, double lam) {
  std::vector<double> av = a.apply(v);
  double r = 0.0;
  for (size_t i = 0; i < av.size(); ++i) {
    const double t = av[i] - lam * v[i];
    r += t * t;
  }
  return std::sqrt(r);
}

}  // namespace

TEST_SUITE_BEGIN("linalg");

TEST_CASE("tridiag_eigen: 2x2 closed form") {
  const std::vector<double> d{2.0, 2.0}, e{-1.0};
  auto ed = tridiag_eigen(d, e, true);
  CHECK(ed.values[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ed.values[1] == doctest::Approx(3.0).epsilon(1e-14));
  const SymMatrix a = SymMatrix::tridiagonal(d, e);
  for (int k = 0; k < 2; ++k)
    CHECK(eigen_residual(a, ed.vectors[k], ed.values[k]) <= 1e-10 * a.norm_inf());
}

TEST_CASE("tridiag_eigen: constant diagonal") {
  const std::vector<double> d(7, 3.25), e(6, 0.0);
  auto ed = tridiag_eigen(d, e, false);
  for (double v : ed.values) CHECK(v == doctest::Approx(3.25).epsilon(1e-15));
}

TEST_CASE("tridiag_eigen: N=20 Dirichlet Laplacian closed form") {
  const int n = 20;
  const double h = 1.0 / (n + 1);
  std::vector<double> d(n, 2.0 / (h * h)), e(n - 1, -1.0 / (h * h));
  auto ed = tridiag_eigen(d, e, true);
  for (int k = 1; k <= n; ++k) {
    const double s = std::sin(k * M_PI / (2.0 * (n + 1)));
    const double exact = 4.0 / (h * h) * s * s;
    CHECK(ed.values[k - 1] == doctest::Approx(exact).epsilon(1e-12));
  }
  // orthonormality
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      const double g = dot(ed.vectors[i], ed.vectors[j]);
      CHECK(std::abs(g - (i == j ? 1.0 : 0.0)) <= 1e-12 * n);
    }
}

TEST_CASE("ldlt_inertia: diagonal inertia and det sign") {
  auto f = ldlt_inertia(SymMatrix::diagonal({1.0, -2.0, 0.0}));
  CHECK(f.inertia() == Inertia{1, 1, 1});
  CHECK(f.det_sign() == 0);
  CHECK(f.singular());
}

TEST_CASE("ldlt_inertia: 2x2 pivot case [[0,1],[1,0]]") {
  SymMatrix a = SymMatrix::dense(2);
  a.set(1, 0, 1.0);
  auto f = ldlt_inertia(a);
  CHECK(f.inertia() == Inertia{1, 0, 1});
  CHECK(f.det_sign() == -1);
  CHECK(f.log_abs_det() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("ldlt_inertia: P2 pencil at lambda=2 has one negative direction") {
  // T(2) of H0=diag(1,4), V=diag(0.3,0.5) is diag(-1.89, 1.75)
  auto f = ldlt_inertia(SymMatrix::diagonal({-1.89, 1.75}));
  CHECK(f.inertia().n_neg == 1);
}

TEST_CASE("solve_with_factor: identity and diagonal") {
  auto fi = ldlt_inertia(SymMatrix::identity(3));
  const std::vector<double> b{1.0, -2.0, 0.5};
  CHECK(solve_with_factor(fi, b) == b);

  auto fd = ldlt_inertia(SymMatrix::diagonal({2.0, 4.0}));
  auto x = solve_with_factor(fd, std::vector<double>{1.0, 1.0});
  CHECK(x[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(x[1] == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("solve_with_factor: random SPD residual contract") {
  auto rng = rng_for("solve-spd");
  for (int rep = 0; rep < 5; ++rep) {
    SymMatrix a = random_spd(10, rng);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<double> b(10);
    for (double& v : b) v = uni(rng);
    auto f = ldlt_inertia(a);
    auto x = solve_with_factor(f, b);
    std::vector<double> ax = a.apply(x);
    double res = 0.0;
    for (int i = 0; i < 10; ++i) res += (ax[i] - b[i]) * (ax[i] - b[i]);
    CHECK(std::sqrt(res) <= 1e-10 * a.norm_inf() * (norm2(x) + 1.0));
  }
}

TEST_CASE("solve_with_factor: singular factor raises") {
  auto f = ldlt_inertia(SymMatrix::diagonal({1.0, 0.0}));
  CHECK_THROWS_AS(solve_with_factor(f, std::vector<double>{1.0, 1.0}), SingularFactorError);
}

TEST_CASE("ldlt_inertia: tridiagonal random solves") {
  auto rng = rng_for("tri-solve");
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 12;
    std::vector<double> d(n), e(n - 1), b(n);
    for (double& v : d) v = uni(rng) + 3.0;  // keep away from singular
    for (double& v : e) v = uni(rng);
    for (double& v : b) v = uni(rng);
    SymMatrix a = SymMatrix::tridiagonal(d, e);
    auto x = solve_with_factor(ldlt_inertia(a), b);
    auto ax = a.apply(x);
    double res = 0.0;
    for (int i = 0; i < n; ++i) res += (ax[i] - b[i]) * (ax[i] - b[i]);
    CHECK(std::sqrt(res) <= 1e-10 * a.norm_inf() * (norm2(x) + 1.0));
  }
}

TEST_CASE("inverse_iteration: diagonal pick") {
  const SymMatrix a = SymMatrix::diagonal({1.0, 5.0});
  auto r = inverse_iteration(a, 0.9, std::vector<double>{1.0, 1.0}, 1e-12, 50);
  CHECK(r.rayleigh == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(r.vector[0]) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("inverse_iteration: Laplacian ground mode is the sine vector") {
  const int n = 10;
  std::vector<double> d(n, 2.0), e(n - 1, -1.0);
  const SymMatrix a = SymMatrix::tridiagonal(d, e);
  const double lam1 = 4.0 * std::pow(std::sin(M_PI / (2.0 * (n + 1))), 2);
  std::vector<double> start(n, 1.0);
  auto r = inverse_iteration(a, lam1 - 0.01, start, 1e-12, 60);
  CHECK(r.rayleigh == doctest::Approx(lam1).epsilon(1e-11));
  std::vector<double> exact(n);
  for (int i = 0; i < n; ++i) exact[i] = std::sin((i + 1) * M_PI / (n + 1));
  normalize(exact);
  const double s = r.vector[0] > 0 ? 1.0 : -1.0;
  for (int i = 0; i < n; ++i) CHECK(s * r.vector[i] == doctest::Approx(exact[i]).epsilon(1e-8));
}

TEST_CASE("inverse_iteration: shift tied between eigenvalues stagnates") {
  const SymMatrix a = SymMatrix::diagonal({1.0, 3.0});
  const std::vector<double> start{1.0, 1.0};  // equal mix, equidistant shift
  CHECK_THROWS_AS(inverse_iteration(a, 2.0, start, 1e-12, 30), ConvergenceError);
}

TEST_CASE("largest_sym_eigenvalue: diagonal and rank-1 actions") {
  const SymMatrix a = SymMatrix::diagonal({0.09, 0.0625});
  MatrixAction act = [&](std::span<const double> x, std::span<double> y) { a.apply(x, y); };
  CHECK(largest_sym_eigenvalue(act, 2, 1e-12) == doctest::Approx(0.09).epsilon(1e-10));

  // x -> v (v^T x) with ||v||^2 = 3
  const std::vector<double> v{1.0, 1.0, 1.0};
  MatrixAction rank1 = [&](std::span<const double> x, std::span<double> y) {
    const double c = dot(v, x);
    for (size_t i = 0; i < y.size(); ++i) y[i] = c * v[i];
  };
  CHECK(largest_sym_eigenvalue(rank1, 3, 1e-12) == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("sym_sqrt_and_invsqrt: diagonal, identity, dense 2x2") {
  auto p = sym_sqrt_and_invsqrt(SymMatrix::diagonal({4.0, 9.0}));
  CHECK(p.sqrt(0, 0) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(p.sqrt(1, 1) == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(p.inv_sqrt(0, 0) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(p.inv_sqrt(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));

  auto pi = sym_sqrt_and_invsqrt(SymMatrix::identity(4));
  for (int i = 0; i < 4; ++i) {
    CHECK(pi.sqrt(i, i) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(pi.inv_sqrt(i, i) == doctest::Approx(1.0).epsilon(1e-13));
  }

  SymMatrix a = SymMatrix::dense(2);
  a.set(0, 0, 2.0);
  a.set(1, 1, 2.0);
  a.set(1, 0, 1.0);
  auto pd = sym_sqrt_and_invsqrt(a);
  // eigenvalues 1 and 3: sqrt has (sqrt(3)+1)/2 on diag, (sqrt(3)-1)/2 off
  CHECK(pd.sqrt(0, 0) == doctest::Approx((std::sqrt(3.0) + 1.0) / 2.0).epsilon(1e-12));
  CHECK(pd.sqrt(1, 0) == doctest::Approx((std::sqrt(3.0) - 1.0) / 2.0).epsilon(1e-12));
  CHECK_THROWS_AS(sym_sqrt_and_invsqrt(SymMatrix::diagonal({1.0, -1.0})), NotSpdError);
}

TEST_CASE("property: Sylvester inertia invariance under congruence") {
  auto rng = rng_for("sylvester");
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int rep = 0; rep < 8; ++rep) {
    const int n = 3 + static_cast<int>(rng() % 28);  // N <= 30
    SymMatrix a = random_dense(n, rng);
    // random nonsingular G (diagonally dominated to avoid near-singularity)
    std::vector<std::vector<double>> g(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g[i][j] = uni(rng) + (i == j ? 2.0 : 0.0);
    SymMatrix gag = SymMatrix::dense(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) {
        double s = 0.0;
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) s += g[k][i] * a(k, l) * g[l][j];
        gag.set(i, j, s);
      }
    CHECK(ldlt_inertia(gag).inertia() == ldlt_inertia(a).inertia());
  }
}

TEST_CASE("property: tridiag_eigen counts match shifted inertia") {
  auto rng = rng_for("count-vs-eigen");
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 2 + static_cast<int>(rng() % 15);
    std::vector<double> d(n), e(n - 1);
    for (double& v : d) v = uni(rng);
    for (double& v : e) v = uni(rng);
    auto ed = tridiag_eigen(d, e, false);
    const double s = uni(rng);
    int below = 0;
    for (double lam : ed.values)
      if (lam < s) ++below;
    CHECK(count_eigenvalues_below(SymMatrix::tridiagonal(d, e), s) == below);
  }
}

TEST_CASE("property: sym_sqrt round trip on random SPD") {
  auto rng = rng_for("sqrt-roundtrip");
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 2 + static_cast<int>(rng() % 49);  // N <= 50
    SymMatrix a = random_spd(n, rng);
    auto p = sym_sqrt_and_invsqrt(a);
    double worst = 0.0, worst_id = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double sq = 0.0, id = 0.0;
        for (int k = 0; k < n; ++k) {
          sq += p.sqrt(i, k) * p.sqrt(k, j);
          id += p.sqrt(i, k) * p.inv_sqrt(k, j);
        }
        worst = std::max(worst, std::abs(sq - a(i, j)));
        worst_id = std::max(worst_id, std::abs(id - (i == j ? 1.0 : 0.0)));
      }
    CHECK(worst <= 1e-10 * a.norm_inf());
    CHECK(worst_id <= 1e-10);
  }
}

TEST_CASE("property: inverse_iteration Rayleigh agrees with tridiag_eigen") {
  auto rng = rng_for("invit-vs-eigen");
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int rep = 0; rep < 6; ++rep) {
    const int n = 8;
    std::vector<double> d(n), e(n - 1);
    for (double& v : d) v = uni(rng) * 3.0;
    for (double& v : e) v = uni(rng);
    auto ed = tridiag_eigen(d, e, false);
    // pick a well separated eigenvalue
    int best = 0;
    double gap = -1.0;
    for (int k = 0; k < n; ++k) {
      double g = std::numeric_limits<double>::infinity();
      if (k > 0) g = std::min(g, ed.values[k] - ed.values[k - 1]);
      if (k < n - 1) g = std::min(g, ed.values[k + 1] - ed.values[k]);
      if (g > gap) {
        gap = g;
        best = k;
      }
    }
    std::vector<double> start(n, 1.0);
    auto r = inverse_iteration(SymMatrix::tridiagonal(d, e), ed.values[best] + 0.3 * gap,
                               start, 1e-13, 80);
    CHECK(std::abs(r.rayleigh - ed.values[best]) <= 1e-10 * (1.0 + std::abs(r.rayleigh)));
  }
}

TEST_CASE("smallest/largest eigenvalue by inertia bisection") {
  auto rng = rng_for("extremal");
  for (int rep = 0; rep < 5; ++rep) {
    const int n = 14;
    SymMatrix a = random_dense(n, rng);
    auto ed = sym_eigen(a, false);
    CHECK(smallest_eigenvalue(a) == doctest::Approx(ed.values.front()).epsilon(1e-10));
    CHECK(largest_eigenvalue(a) == doctest::Approx(ed.values.back()).epsilon(1e-10));
  }
}

TEST_SUITE_END();
