// Copyright (c) the kgpencil developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "kgpencil/pencil.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace kgp {

KGPencil::KGPencil(SymMatrix h0, SymMatrix v, double m, PencilProvenance provenance)
    : h0_(std::move(h0)), v_(std::move(v)), m_(m), provenance_(provenance) {
  if (h0_.size() != v_.size()) throw PencilError("KGPencil: dimension mismatch");
  if (!(m_ > 0.0)) throw PencilError("KGPencil: mass must be positive");
  h0_norm_ = h0_.norm_inf();
  v_norm_ = v_.norm_inf();
  const double lmin = smallest_eigenvalue(h0_);
  if (lmin < m_ * m_ - 1e-10 * h0_norm_)
    throw PencilError("KGPencil: lambda_min(H0) < m^2");
}

double KGPencil::scale(double lambda) const {
  const double vl = v_norm_ + std::abs(lambda);
  return std::max(h0_norm_ + vl * vl, 1e-30);
}

bool KGPencil::irreducible_tridiagonal() const {
  if (h0_.band() != Band::Tridiagonal || !v_.is_diagonal()) return false;
  for (double e : h0_.off())
    if (e == 0.0) return false;
  return h0_.size() > 1;
}

SymMatrix t_of_lambda(const KGPencil& p, double lambda) {
  if (!std::isfinite(lambda)) throw PencilError("t_of_lambda: lambda must be finite");
  const int n = p.size();
  const SymMatrix& h0 = p.h0();
  const SymMatrix& v = p.v();
  if (h0.band() == Band::Tridiagonal && v.is_diagonal()) {
    std::vector<double> d(n);
    const auto& hd = h0.diag();
    const auto& vd = v.diag();
    for (int i = 0; i < n; ++i) {
      const double w = vd[i] - lambda;
      d[i] = hd[i] - w * w;
    }
    return SymMatrix::tridiagonal(std::move(d), h0.off());
  }
  // dense assembly: T = H0 - (V - lambda)^2 entrywise via the V product
  SymMatrix t = SymMatrix::dense(n);
  const SymMatrix hd = h0.band() == Band::Full ? h0 : h0.to_dense();
  const SymMatrix vd = v.band() == Band::Full ? v : v.to_dense();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double v2 = 0.0;  // (V^2)_{ij}
      for (int k = 0; k < n; ++k) v2 += vd(i, k) * vd(k, j);
      double val = hd(i, j) - v2 + 2.0 * lambda * vd(i, j);
      if (i == j) val -= lambda * lambda;
      t.set(i, j, val);
    }
  }
  return t;
}

double t_form(const KGPencil& p, double lambda, std::span<const double> x) {
  const int n = p.size();
  if (static_cast<int>(x.size()) != n) throw PencilError("t_form: size mismatch");
  const double hx = p.h0().quad_form(x);
  std::vector<double> w = p.v().apply(x);
  double vnorm2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double wi = w[i] - lambda * x[i];
    vnorm2 += wi * wi;
  }
  return hx - vnorm2;
}

RootFunctionalData root_functional_data(const KGPencil& p, std::span<const double> x) {
  const int n = p.size();
  if (static_cast<int>(x.size()) != n) throw PencilError("root_functionals: size mismatch");
  const double xx = dot(x, x);
  if (xx == 0.0) throw PencilError("root_functionals: zero vector");
  std::vector<double> vx = p.v().apply(x);
  RootFunctionalData out;
  out.mu = dot(x, vx) / xx;
  out.c = (p.h0().quad_form(x) - dot(vx, vx)) / xx;
  out.discriminant = out.mu * out.mu + out.c;
  const double breakdown = 1e-14 * std::max(out.mu * out.mu, std::abs(out.c));
  out.damped_at_x = out.discriminant > breakdown;
  if (out.damped_at_x) {
    // roots of -lambda^2 + 2 mu lambda + c: form the larger-magnitude root
    // first and take the other from the product -c to avoid cancellation
    const double s = std::sqrt(out.discriminant);
    if (out.mu >= 0.0) {
      out.roots.p_plus = out.mu + s;
      out.roots.p_minus = -out.c / out.roots.p_plus;
    } else {
      out.roots.p_minus = out.mu - s;
      out.roots.p_plus = -out.c / out.roots.p_minus;
    }
    out.roots.discriminant = out.discriminant;
  }
  return out;
}

RootPair root_functionals(const KGPencil& p, std::span<const double> x) {
  RootFunctionalData d = root_functional_data(p, x);
  if (!d.damped_at_x)
    throw NotStronglyDampedError(std::vector<double>(x.begin(), x.end()), d.discriminant);
  return d.roots;
}

double shift_identity_residual(const KGPencil& p, double lambda, double mu) {
  const SymMatrix tl = t_of_lambda(p, lambda);
  const SymMatrix tm = t_of_lambda(p, mu);
  const SymMatrix& v = p.v();
  const double dl = lambda - mu;
  const int n = p.size();
  // residual R = T(lambda) - T(mu) - 2 dl (V - mu) + dl^2, reported as ||R||_inf
  std::vector<double> row_sum(n, 0.0);
  auto add = [&](int i, int j, double r) {
    row_sum[i] += std::abs(r);
    if (i != j) row_sum[j] += std::abs(r);
  };
  if (tl.band() == Band::Tridiagonal && tm.band() == Band::Tridiagonal && v.is_diagonal()) {
    for (int i = 0; i < n; ++i) {
      const double r = tl.diag()[i] - tm.diag()[i] - 2.0 * dl * (v.diag()[i] - mu) + dl * dl;
      add(i, i, r);
    }
    for (int i = 0; i + 1 < n; ++i) add(i + 1, i, tl.off()[i] - tm.off()[i]);
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) {
        double r = tl(i, j) - tm(i, j) - 2.0 * dl * v(i, j);
        if (i == j) r += 2.0 * dl * mu + dl * dl;
        add(i, j, r);
      }
  }
  double worst = 0.0;
  for (double s : row_sum) worst = std::max(worst, s);
  return worst;
}

SymMatrix build_l(const KGPencil& p, double lambda) {
  const int n = p.size();
  const SqrtPair roots = sym_sqrt_and_invsqrt(p.h0());
  const SymMatrix& ih = roots.inv_sqrt;  // H0^{-1/2}, dense
  // B = (V - lambda I) H0^{-1/2}; L = I - B^T B
  std::vector<double> b(static_cast<size_t>(n) * n, 0.0);
  const SymMatrix& v = p.v();
  if (v.is_diagonal()) {
    for (int i = 0; i < n; ++i) {
      const double vi = v.diag()[i] - lambda;
      for (int j = 0; j < n; ++j) b[static_cast<size_t>(i) * n + j] = vi * ih(i, j);
    }
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += (v(i, k) - (i == k ? lambda : 0.0) * 1.0) * ih(k, j);
        b[static_cast<size_t>(i) * n + j] = s;
      }
  }
  SymMatrix l = SymMatrix::dense(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k)
        s += b[static_cast<size_t>(k) * n + i] * b[static_cast<size_t>(k) * n + j];
      l.set(i, j, (i == j ? 1.0 : 0.0) - s);
    }
  return l;
}

SymMatrix load_sym_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PencilError("load_sym_matrix: cannot open " + path);
  int n = 0;
  if (!(in >> n) || n < 1) throw PencilError("load_sym_matrix: bad dimension header");
  SymMatrix a = SymMatrix::dense(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      double v;
      if (!(in >> v)) throw PencilError("load_sym_matrix: truncated file " + path);
      a.set(i, j, v);
    }
  return a;
}

void save_sym_matrix(const SymMatrix& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw PencilError("save_sym_matrix: cannot open " + path);
  const int n = a.size();
  out << n << "\n";
  out.precision(17);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) out << a(i, j) << (j == i ? "" : " ");
    out << "\n";
  }
}

}  // namespace kgp
