// Copyright (c) the kgpencil developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "kgpencil/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace kgp {

namespace {

constexpr double kZeroPivotRel = 1e-14;  // relative to ||A||_inf

inline int packed_index(int i, int j) { return i * (i + 1) / 2 + j; }  // j <= i

inline double sign_of(double x) { return x >= 0.0 ? 1.0 : -1.0; }

}  // namespace

// ---------------------------------------------------------------------------
// SymMatrix

SymMatrix SymMatrix::dense(int n) {
  if (n < 1) throw LinalgError("SymMatrix: dimension must be >= 1");
  SymMatrix m;
  m.n_ = n;
  m.band_ = Band::Full;
  m.lower_.assign(static_cast<size_t>(n) * (n + 1) / 2, 0.0);
  return m;
}

SymMatrix SymMatrix::tridiagonal(std::vector<double> diag, std::vector<double> off) {
  const int n = static_cast<int>(diag.size());
  if (n < 1) throw LinalgError("SymMatrix: dimension must be >= 1");
  if (static_cast<int>(off.size()) != n - 1)
    throw LinalgError("SymMatrix: off-diagonal length must be N-1");
  SymMatrix m;
  m.n_ = n;
  m.band_ = Band::Tridiagonal;
  m.d_ = std::move(diag);
  m.e_ = std::move(off);
  return m;
}

SymMatrix SymMatrix::diagonal(std::vector<double> diag) {
  const int n = static_cast<int>(diag.size());
  return tridiagonal(std::move(diag), std::vector<double>(n > 0 ? n - 1 : 0, 0.0));
}

SymMatrix SymMatrix::identity(int n) {
  return diagonal(std::vector<double>(static_cast<size_t>(n), 1.0));
}

bool SymMatrix::is_diagonal() const {
  if (band_ != Band::Tridiagonal) return false;
  return std::all_of(e_.begin(), e_.end(), [](double v) { return v == 0.0; });
}

double SymMatrix::operator()(int i, int j) const {
  if (i < j) std::swap(i, j);
  if (band_ == Band::Full) return lower_[packed_index(i, j)];
  if (i == j) return d_[i];
  if (i == j + 1) return e_[j];
  return 0.0;
}

void SymMatrix::set(int i, int j, double value) {
  if (i < j) std::swap(i, j);
  if (band_ == Band::Full) {
    lower_[packed_index(i, j)] = value;
    return;
  }
  if (i == j) {
    d_[i] = value;
  } else if (i == j + 1) {
    e_[j] = value;
  } else {
    throw LinalgError("SymMatrix: entry outside tridiagonal band");
  }
}

const std::vector<double>& SymMatrix::diag() const {
  if (band_ != Band::Tridiagonal) throw LinalgError("SymMatrix: not tridiagonal");
  return d_;
}

const std::vector<double>& SymMatrix::off() const {
  if (band_ != Band::Tridiagonal) throw LinalgError("SymMatrix: not tridiagonal");
  return e_;
}

const std::vector<double>& SymMatrix::packed_lower() const {
  if (band_ != Band::Full) throw LinalgError("SymMatrix: not dense");
  return lower_;
}

void SymMatrix::apply(std::span<const double> x, std::span<double> y) const {
  if (static_cast<int>(x.size()) != n_ || static_cast<int>(y.size()) != n_)
    throw LinalgError("SymMatrix::apply: size mismatch");
  if (band_ == Band::Tridiagonal) {
    for (int i = 0; i < n_; ++i) {
      double s = d_[i] * x[i];
      if (i > 0) s += e_[i - 1] * x[i - 1];
      if (i + 1 < n_) s += e_[i] * x[i + 1];
      y[i] = s;
    }
    return;
  }
  std::fill(y.begin(), y.end(), 0.0);
  for (int i = 0; i < n_; ++i) {
    const double xi = x[i];
    double s = 0.0;
    const double* row = lower_.data() + packed_index(i, 0);
    for (int j = 0; j < i; ++j) {
      s += row[j] * x[j];
      y[j] += row[j] * xi;
    }
    y[i] += s + row[i] * xi;
  }
}

std::vector<double> SymMatrix::apply(std::span<const double> x) const {
  std::vector<double> y(n_);
  apply(x, y);
  return y;
}

double SymMatrix::quad_form(std::span<const double> x) const {
  if (band_ == Band::Tridiagonal) {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += d_[i] * x[i] * x[i];
    for (int i = 0; i + 1 < n_; ++i) s += 2.0 * e_[i] * x[i] * x[i + 1];
    return s;
  }
  double s = 0.0;
  for (int i = 0; i < n_; ++i) {
    const double* row = lower_.data() + packed_index(i, 0);
    double off = 0.0;
    for (int j = 0; j < i; ++j) off += row[j] * x[j];
    s += (2.0 * off + row[i] * x[i]) * x[i];
  }
  return s;
}

double SymMatrix::norm_inf() const {
  double best = 0.0;
  if (band_ == Band::Tridiagonal) {
    for (int i = 0; i < n_; ++i) {
      double s = std::abs(d_[i]);
      if (i > 0) s += std::abs(e_[i - 1]);
      if (i + 1 < n_) s += std::abs(e_[i]);
      best = std::max(best, s);
    }
    return best;
  }
  std::vector<double> row_sum(n_, 0.0);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double a = std::abs(lower_[packed_index(i, j)]);
      row_sum[i] += a;
      if (i != j) row_sum[j] += a;
    }
  }
  for (double s : row_sum) best = std::max(best, s);
  return best;
}

SymMatrix SymMatrix::to_dense() const {
  if (band_ == Band::Full) return *this;
  SymMatrix m = dense(n_);
  for (int i = 0; i < n_; ++i) m.set(i, i, d_[i]);
  for (int i = 0; i + 1 < n_; ++i) m.set(i + 1, i, e_[i]);
  return m;
}

// ---------------------------------------------------------------------------
// vector helpers

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void normalize(std::span<double> x) {
  const double n = norm2(x);
  if (n == 0.0) throw LinalgError("normalize: zero vector");
  for (double& v : x) v /= n;
}

// ---------------------------------------------------------------------------
// implicit QL with Wilkinson shifts (EISPACK tql2 lineage)

namespace {

// Diagonalizes tridiag(d, e) in place. e[i] couples d[i] and d[i+1]; e has
// length n with e[n-1] as workspace. When z is non-null its columns are
// rotated along (z is zrows x n, row-major), so passing the identity yields
// eigenvectors and passing a basis accumulates it.
void ql_implicit(std::vector<double>& d, std::vector<double>& e, std::vector<double>* z,
                 int zrows) {
  const int n = static_cast<int>(d.size());
  const double eps = std::numeric_limits<double>::epsilon();
  if (n == 1) return;
  e[n - 1] = 0.0;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == 50)
          throw ConvergenceError("tridiag_eigen: no convergence in 50 sweeps");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);  // Wilkinson shift
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + (g >= 0 ? std::abs(r) : -std::abs(r)));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {  // recover from underflow
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          if (z) {
            double* zi = z->data();
            for (int k = 0; k < zrows; ++k) {
              f = zi[k * n + i + 1];
              zi[k * n + i + 1] = s * zi[k * n + i] + c * f;
              zi[k * n + i] = c * zi[k * n + i] - s * f;
            }
          }
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

EigenDecomposition finish_eigen(std::vector<double> d, std::vector<double>* z, int zrows,
                                bool want_vectors, int n) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });
  EigenDecomposition out;
  out.values.resize(n);
  for (int k = 0; k < n; ++k) out.values[k] = d[order[k]];
  if (want_vectors && z) {
    out.vectors.resize(n);
    for (int k = 0; k < n; ++k) {
      out.vectors[k].resize(zrows);
      for (int r = 0; r < zrows; ++r) out.vectors[k][r] = (*z)[r * n + order[k]];
    }
  }
  return out;
}

}  // namespace

EigenDecomposition tridiag_eigen(std::span<const double> d, std::span<const double> e,
                                 bool want_vectors) {
  const int n = static_cast<int>(d.size());
  if (n < 1) throw LinalgError("tridiag_eigen: empty matrix");
  if (static_cast<int>(e.size()) != n - 1)
    throw LinalgError("tridiag_eigen: inconsistent lengths");
  std::vector<double> dd(d.begin(), d.end());
  std::vector<double> ee(n, 0.0);
  std::copy(e.begin(), e.end(), ee.begin());
  std::vector<double> z;
  if (want_vectors) {
    z.assign(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) z[static_cast<size_t>(i) * n + i] = 1.0;
  }
  ql_implicit(dd, ee, want_vectors ? &z : nullptr, n);
  return finish_eigen(std::move(dd), want_vectors ? &z : nullptr, n, want_vectors, n);
}

// ---------------------------------------------------------------------------
// dense path: Householder reduction, then QL on the tridiagonal form

namespace {

// Reduces the full symmetric matrix a (row-major n x n) to tridiagonal form,
// accumulating the orthogonal transformation in a itself (tred2 lineage).
void householder_tridiagonalize(std::vector<double>& a, int n, std::vector<double>& d,
                                std::vector<double>& e) {
  auto at = [&](int i, int j) -> double& { return a[static_cast<size_t>(i) * n + j]; };
  d.assign(n, 0.0);
  e.assign(n, 0.0);
  for (int i = n - 1; i >= 1; --i) {
    const int l = i - 1;
    double h = 0.0;
    if (l > 0) {
      double scale = 0.0;
      for (int k = 0; k <= l; ++k) scale += std::abs(at(i, k));
      if (scale == 0.0) {
        e[i] = at(i, l);
      } else {
        for (int k = 0; k <= l; ++k) {
          at(i, k) /= scale;
          h += at(i, k) * at(i, k);
        }
        double f = at(i, l);
        double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        at(i, l) = f - g;
        f = 0.0;
        for (int j = 0; j <= l; ++j) {
          at(j, i) = at(i, j) / h;
          g = 0.0;
          for (int k = 0; k <= j; ++k) g += at(j, k) * at(i, k);
          for (int k = j + 1; k <= l; ++k) g += at(k, j) * at(i, k);
          e[j] = g / h;
          f += e[j] * at(i, j);
        }
        const double hh = f / (h + h);
        for (int j = 0; j <= l; ++j) {
          f = at(i, j);
          e[j] = g = e[j] - hh * f;
          for (int k = 0; k <= j; ++k) at(j, k) -= f * e[k] + g * at(i, k);
        }
      }
    } else {
      e[i] = at(i, l);
    }
    d[i] = h;
  }
  d[0] = 0.0;
  e[0] = 0.0;
  for (int i = 0; i < n; ++i) {
    const int l = i - 1;
    if (d[i] != 0.0) {
      for (int j = 0; j <= l; ++j) {
        double g = 0.0;
        for (int k = 0; k <= l; ++k) g += at(i, k) * at(k, j);
        for (int k = 0; k <= l; ++k) at(k, j) -= g * at(k, i);
      }
    }
    d[i] = at(i, i);
    at(i, i) = 1.0;
    for (int j = 0; j <= l; ++j) at(j, i) = at(i, j) = 0.0;
  }
  // shift subdiagonal into e[0..n-2]
  for (int i = 0; i + 1 < n; ++i) e[i] = e[i + 1];
  e[n - 1] = 0.0;
}

}  // namespace

EigenDecomposition sym_eigen(const SymMatrix& a, bool want_vectors) {
  const int n = a.size();
  if (a.band() == Band::Tridiagonal) return tridiag_eigen(a.diag(), a.off(), want_vectors);
  std::vector<double> full(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) full[static_cast<size_t>(i) * n + j] = a(i, j);
  std::vector<double> d, e;
  householder_tridiagonalize(full, n, d, e);
  ql_implicit(d, e, &full, n);
  if (!want_vectors) return finish_eigen(std::move(d), nullptr, n, false, n);
  return finish_eigen(std::move(d), &full, n, true, n);
}

// ---------------------------------------------------------------------------
// inertia: Sturm recurrence (tridiagonal) and Bunch-Kaufman LDL^T (dense)

namespace {

// Counts pivot signs of the unpivoted LDL^T recurrence of tridiag(d,e) -
// sigma I. Pivots below zero_tol in magnitude land in n_zero; exact zeros
// continue the recurrence as a signed tiny value so IEEE semantics carry on.
Inertia sturm_inertia(std::span<const double> d, std::span<const double> e, double sigma,
                      double zero_tol) {
  Inertia in;
  const int n = static_cast<int>(d.size());
  double carry = 0.0;
  for (int i = 0; i < n; ++i) {
    double piv = d[i] - sigma;
    if (i > 0) piv -= e[i - 1] * e[i - 1] / carry;
    const double mag = std::abs(piv);
    if (mag < zero_tol || !std::isfinite(piv)) {
      if (std::isfinite(piv)) {
        ++in.n_zero;
      } else {
        // an overflowed pivot acts as an extreme value of its sign
        (piv > 0 ? in.n_pos : in.n_neg) += 1;
      }
    } else if (piv < 0.0) {
      ++in.n_neg;
    } else {
      ++in.n_pos;
    }
    carry = piv;
    if (carry == 0.0) carry = -std::numeric_limits<double>::min();
  }
  return in;
}

// Bunch-Kaufman factorization of the lower triangle of a full row-major
// matrix (dsytf2 lineage, partial pivoting). pivot[k] >= 0 marks a 1x1 pivot
// interchanged with row pivot[k]; pivot[k] == pivot[k+1] == -(r+1) marks a
// 2x2 pivot block with rows k+1 and r interchanged.
void bunch_kaufman_factor(std::vector<double>& w, int n, std::vector<int>& pivot) {
  auto at = [&](int i, int j) -> double& { return w[static_cast<size_t>(i) * n + j]; };
  const double alpha = (1.0 + std::sqrt(17.0)) / 8.0;
  pivot.assign(n, 0);
  int k = 0;
  while (k < n) {
    int kstep = 1;
    int kp = k;
    const double absakk = std::abs(at(k, k));
    int imax = k;
    double colmax = 0.0;
    if (k < n - 1) {
      for (int i = k + 1; i < n; ++i) {
        if (std::abs(at(i, k)) > colmax) {
          colmax = std::abs(at(i, k));
          imax = i;
        }
      }
    }
    if (std::max(absakk, colmax) == 0.0) {
      kp = k;  // zero column: keep the zero 1x1 pivot
    } else if (absakk >= alpha * colmax) {
      kp = k;
    } else {
      double rowmax = 0.0;
      for (int j = k; j < imax; ++j) rowmax = std::max(rowmax, std::abs(at(imax, j)));
      for (int i = imax + 1; i < n; ++i) rowmax = std::max(rowmax, std::abs(at(i, imax)));
      if (absakk >= alpha * colmax * (colmax / rowmax)) {
        kp = k;
      } else if (std::abs(at(imax, imax)) >= alpha * rowmax) {
        kp = imax;
      } else {
        kp = imax;
        kstep = 2;
      }
    }
    const int kk = (kstep == 2) ? k + 1 : k;
    if (kp != kk) {
      for (int i = kp + 1; i < n; ++i) std::swap(at(i, kk), at(i, kp));
      for (int j = kk + 1; j < kp; ++j) std::swap(at(j, kk), at(kp, j));
      std::swap(at(kk, kk), at(kp, kp));
      if (kstep == 2) std::swap(at(k + 1, k), at(kp, k));
    }
    if (kstep == 1) {
      const double dkk = at(k, k);
      if (dkk != 0.0) {
        const double r1 = 1.0 / dkk;
        for (int j = k + 1; j < n; ++j) {
          const double cj = r1 * at(j, k);
          for (int i = j; i < n; ++i) at(i, j) -= at(i, k) * cj;
        }
        for (int i = k + 1; i < n; ++i) at(i, k) *= r1;
      }
      pivot[k] = kp;
    } else {
      if (k < n - 2) {
        double d21 = at(k + 1, k);
        const double d11 = at(k + 1, k + 1) / d21;
        const double d22 = at(k, k) / d21;
        const double t = 1.0 / (d11 * d22 - 1.0);
        d21 = t / d21;
        for (int j = k + 2; j < n; ++j) {
          const double wk = d21 * (d11 * at(j, k) - at(j, k + 1));
          const double wkp1 = d21 * (d22 * at(j, k + 1) - at(j, k));
          for (int i = j; i < n; ++i) at(i, j) -= at(i, k) * wk + at(i, k + 1) * wkp1;
          at(j, k) = wk;
          at(j, k + 1) = wkp1;
        }
      }
      pivot[k] = -(kp + 1);
      pivot[k + 1] = -(kp + 1);
    }
    k += kstep;
  }
}

void bunch_kaufman_solve(const std::vector<double>& w, int n, const std::vector<int>& pivot,
                         double zero_tol, std::vector<double>& x) {
  auto at = [&](int i, int j) -> double { return w[static_cast<size_t>(i) * n + j]; };
  // forward: x <- D^{-1} L^{-1} P x, one pivot block at a time
  int k = 0;
  while (k < n) {
    if (pivot[k] >= 0) {
      std::swap(x[k], x[pivot[k]]);
      for (int i = k + 1; i < n; ++i) x[i] -= at(i, k) * x[k];
      const double dkk = at(k, k);
      if (std::abs(dkk) < zero_tol)
        throw SingularFactorError("solve: singular 1x1 pivot");
      x[k] /= dkk;
      ++k;
    } else {
      const int kp = -pivot[k] - 1;
      std::swap(x[k + 1], x[kp]);
      for (int i = k + 2; i < n; ++i) x[i] -= at(i, k) * x[k] + at(i, k + 1) * x[k + 1];
      const double a11 = at(k, k), a21 = at(k + 1, k), a22 = at(k + 1, k + 1);
      const double det = a11 * a22 - a21 * a21;
      if (std::abs(det) < zero_tol * zero_tol)
        throw SingularFactorError("solve: singular 2x2 pivot");
      const double b1 = x[k], b2 = x[k + 1];
      x[k] = (a22 * b1 - a21 * b2) / det;
      x[k + 1] = (a11 * b2 - a21 * b1) / det;
      k += 2;
    }
  }
  // backward: x <- P^T L^{-T} x, blocks in reverse order
  k = n - 1;
  while (k >= 0) {
    if (pivot[k] >= 0) {
      double s = 0.0;
      for (int i = k + 1; i < n; ++i) s += at(i, k) * x[i];
      x[k] -= s;
      std::swap(x[k], x[pivot[k]]);
      --k;
    } else {
      const int kb = k - 1;  // block starts at kb
      const int kp = -pivot[k] - 1;
      double s0 = 0.0, s1 = 0.0;
      for (int i = k + 1; i < n; ++i) {
        s0 += at(i, kb) * x[i];
        s1 += at(i, kb + 1) * x[i];
      }
      x[kb] -= s0;
      x[kb + 1] -= s1;
      std::swap(x[kb + 1], x[kp]);
      k -= 2;
    }
  }
}

// classify a 1x1 pivot into the inertia and determinant accumulators
void tally_pivot(double piv, double zero_tol, Inertia& in, double& logdet, int& sign,
                 bool& singular) {
  if (std::abs(piv) < zero_tol) {
    ++in.n_zero;
    sign = 0;
    singular = true;
    logdet = -std::numeric_limits<double>::infinity();
  } else {
    (piv < 0 ? in.n_neg : in.n_pos) += 1;
    if (sign != 0) {
      sign *= (piv < 0 ? -1 : 1);
      logdet += std::log(std::abs(piv));
    }
  }
}

}  // namespace

LdltFactorization ldlt_inertia(const SymMatrix& a) {
  LdltFactorization f;
  const int n = a.size();
  f.n_ = n;
  f.band_ = a.band();
  f.a_ = a;
  f.zero_tol_ = kZeroPivotRel * a.norm_inf();
  if (f.zero_tol_ == 0.0) f.zero_tol_ = std::numeric_limits<double>::min();

  if (a.band() == Band::Tridiagonal) {
    // inertia from the Sturm-type recurrence
    f.inertia_ = sturm_inertia(a.diag(), a.off(), 0.0, f.zero_tol_);
    // LU with partial pivoting (dgttrf lineage) for solves and determinant
    f.lu_d_ = a.diag();
    f.lu_dl_.assign(n > 1 ? n - 1 : 0, 0.0);
    f.lu_du_.assign(n > 1 ? n - 1 : 0, 0.0);
    f.lu_du2_.assign(n > 2 ? n - 2 : 0, 0.0);
    f.lu_piv_.assign(n, 0);
    if (n > 1) {
      std::copy(a.off().begin(), a.off().end(), f.lu_dl_.begin());
      std::copy(a.off().begin(), a.off().end(), f.lu_du_.begin());
    }
    int swaps = 0;
    for (int i = 0; i < n - 1; ++i) {
      f.lu_piv_[i] = i;
      if (std::abs(f.lu_d_[i]) >= std::abs(f.lu_dl_[i])) {
        if (f.lu_d_[i] != 0.0) {
          const double fact = f.lu_dl_[i] / f.lu_d_[i];
          f.lu_dl_[i] = fact;
          f.lu_d_[i + 1] -= fact * f.lu_du_[i];
        }
        if (i < n - 2) f.lu_du2_[i] = 0.0;
      } else {
        const double fact = f.lu_d_[i] / f.lu_dl_[i];
        f.lu_d_[i] = f.lu_dl_[i];
        f.lu_dl_[i] = fact;
        const double temp = f.lu_du_[i];
        f.lu_du_[i] = f.lu_d_[i + 1];
        f.lu_d_[i + 1] = temp - fact * f.lu_d_[i + 1];
        if (i < n - 2) {
          f.lu_du2_[i] = f.lu_du_[i + 1];
          f.lu_du_[i + 1] = -fact * f.lu_du_[i + 1];
        }
        f.lu_piv_[i] = i + 1;
        ++swaps;
      }
    }
    f.lu_piv_[n - 1] = n - 1;
    f.det_sign_ = (swaps % 2 == 0) ? 1 : -1;
    f.log_abs_det_ = 0.0;
    for (int i = 0; i < n; ++i) {
      const double u = f.lu_d_[i];
      if (std::abs(u) < f.zero_tol_) {
        f.singular_ = true;
        f.det_sign_ = 0;
        f.log_abs_det_ = -std::numeric_limits<double>::infinity();
        break;
      }
      if (u < 0) f.det_sign_ = -f.det_sign_;
      f.log_abs_det_ += std::log(std::abs(u));
    }
    if (f.inertia_.n_zero > 0) f.singular_ = true;
    return f;
  }

  // dense Bunch-Kaufman
  f.bk_.assign(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) f.bk_[static_cast<size_t>(i) * n + j] = a(i, j);
  bunch_kaufman_factor(f.bk_, n, f.pivot_);
  auto at = [&](int i, int j) -> double { return f.bk_[static_cast<size_t>(i) * n + j]; };
  int k = 0;
  int sign = 1;
  while (k < n) {
    if (f.pivot_[k] >= 0) {
      tally_pivot(at(k, k), f.zero_tol_, f.inertia_, f.log_abs_det_, sign, f.singular_);
      ++k;
    } else {
      const double a11 = at(k, k), a21 = at(k + 1, k), a22 = at(k + 1, k + 1);
      const double tr = a11 + a22;
      const double det = a11 * a22 - a21 * a21;
      const double rad = std::sqrt(std::max(tr * tr - 4.0 * det, 0.0));
      const double l1 = (tr + rad) / 2.0;
      const double l2 = (std::abs(l1) > 0.0) ? det / l1 : (tr - rad) / 2.0;
      tally_pivot(l1, f.zero_tol_, f.inertia_, f.log_abs_det_, sign, f.singular_);
      tally_pivot(l2, f.zero_tol_, f.inertia_, f.log_abs_det_, sign, f.singular_);
      k += 2;
    }
  }
  f.det_sign_ = sign;
  return f;
}

std::vector<double> LdltFactorization::solve_raw(std::span<const double> b) const {
  if (static_cast<int>(b.size()) != n_) throw LinalgError("solve: size mismatch");
  if (singular_) throw SingularFactorError("solve: factorization is singular");
  std::vector<double> x(b.begin(), b.end());
  if (band_ == Band::Tridiagonal) {
    const int n = n_;
    for (int i = 0; i < n - 1; ++i) {
      if (lu_piv_[i] == i) {
        x[i + 1] -= lu_dl_[i] * x[i];
      } else {
        const double temp = x[i];
        x[i] = x[i + 1];
        x[i + 1] = temp - lu_dl_[i] * x[i];
      }
    }
    x[n - 1] /= lu_d_[n - 1];
    if (n > 1) x[n - 2] = (x[n - 2] - lu_du_[n - 2] * x[n - 1]) / lu_d_[n - 2];
    for (int i = n - 3; i >= 0; --i)
      x[i] = (x[i] - lu_du_[i] * x[i + 1] - lu_du2_[i] * x[i + 2]) / lu_d_[i];
    return x;
  }
  bunch_kaufman_solve(bk_, n_, pivot_, zero_tol_, x);
  return x;
}

std::vector<double> solve_with_factor(const LdltFactorization& f, std::span<const double> b) {
  std::vector<double> x = f.solve_raw(b);
  // one step of iterative refinement
  std::vector<double> r = f.a_.apply(x);
  for (size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  const std::vector<double> dx = f.solve_raw(r);
  for (size_t i = 0; i < x.size(); ++i) x[i] += dx[i];
  return x;
}

// ---------------------------------------------------------------------------
// inverse iteration

InverseIterationResult inverse_iteration(const SymMatrix& a, double shift,
                                         std::span<const double> start, double tol,
                                         int max_iter) {
  const int n = a.size();
  if (static_cast<int>(start.size()) != n) throw LinalgError("inverse_iteration: size mismatch");
  const double anorm = a.norm_inf();

  auto shifted = [&](double mu) {
    if (a.band() == Band::Tridiagonal) {
      std::vector<double> d = a.diag();
      for (double& v : d) v -= mu;
      return SymMatrix::tridiagonal(std::move(d), a.off());
    }
    SymMatrix s = a;
    for (int i = 0; i < n; ++i) s.set(i, i, s(i, i) - mu);
    return s;
  };

  double mu = shift;
  LdltFactorization f = ldlt_inertia(shifted(mu));
  for (int attempt = 0; attempt < 4 && f.singular(); ++attempt) {
    mu += (attempt + 1) * std::max(f.zero_threshold(), 1e-14 * std::max(1.0, std::abs(mu)));
    f = ldlt_inertia(shifted(mu));
  }
  if (f.singular()) throw SingularFactorError("inverse_iteration: shift is exactly singular");

  std::vector<double> x(start.begin(), start.end());
  normalize(x);
  std::vector<double> ax(n);
  for (int it = 1; it <= max_iter; ++it) {
    std::vector<double> y = f.solve_raw(x);
    normalize(y);
    x = std::move(y);
    a.apply(x, ax);
    const double rq = dot(x, ax);
    double res = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = ax[i] - rq * x[i];
      res += r * r;
    }
    res = std::sqrt(res);
    if (res <= tol * std::max(anorm, std::numeric_limits<double>::min()))
      return {std::move(x), rq, it};
  }
  throw ConvergenceError("inverse_iteration: stagnation after max_iter");
}

// ---------------------------------------------------------------------------
// Lanczos for the largest eigenvalue of a PSD action

double largest_sym_eigenvalue(const MatrixAction& apply, int n, double tol) {
  if (n < 1) throw LinalgError("largest_sym_eigenvalue: empty");
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<std::vector<double>> basis;
  std::vector<double> alphas, betas;
  std::vector<double> q(n), w(n);
  for (double& v : q) v = uni(rng);
  normalize(q);
  basis.push_back(q);

  const int max_steps = std::min(n, 400);
  double scale = 0.0;
  for (int j = 0; j < max_steps; ++j) {
    apply(basis[j], w);
    const double alpha = dot(basis[j], w);
    alphas.push_back(alpha);
    for (int i = 0; i < n; ++i) {
      w[i] -= alpha * basis[j][i];
      if (j > 0) w[i] -= betas[j - 1] * basis[j - 1][i];
    }
    for (int pass = 0; pass < 2; ++pass) {  // full reorthogonalization
      for (const auto& b : basis) {
        const double c = dot(b, w);
        for (int i = 0; i < n; ++i) w[i] -= c * b[i];
      }
    }
    const double beta = norm2(w);
    scale = std::max(scale, std::abs(alpha) + beta);
    EigenDecomposition ritz = tridiag_eigen(alphas, betas, true);
    const double theta = ritz.values.back();
    const double bottom = std::abs(ritz.vectors.back()[j]);
    const double floor = std::max(scale, std::numeric_limits<double>::min());
    if (beta * bottom <= tol * std::max(std::abs(theta), 1e-3 * floor) ||
        beta <= 1e-15 * floor || j + 1 == n)
      return theta;
    betas.push_back(beta);
    for (int i = 0; i < n; ++i) w[i] /= beta;
    basis.push_back(w);
  }
  throw ConvergenceError("largest_sym_eigenvalue: iteration cap exceeded");
}

// ---------------------------------------------------------------------------
// SPD square roots

SqrtPair sym_sqrt_and_invsqrt(const SymMatrix& a) {
  const int n = a.size();
  EigenDecomposition ed = sym_eigen(a, true);
  const double lmax = std::max(std::abs(ed.values.front()), std::abs(ed.values.back()));
  if (ed.values.front() <= 1e-12 * lmax)
    throw NotSpdError("sym_sqrt_and_invsqrt: matrix is not SPD");
  SymMatrix s = SymMatrix::dense(n);
  SymMatrix si = SymMatrix::dense(n);
  std::vector<double> rt(n), irt(n);
  for (int k = 0; k < n; ++k) {
    rt[k] = std::sqrt(ed.values[k]);
    irt[k] = 1.0 / rt[k];
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double sv = 0.0, siv = 0.0;
      for (int k = 0; k < n; ++k) {
        const double p = ed.vectors[k][i] * ed.vectors[k][j];
        sv += rt[k] * p;
        siv += irt[k] * p;
      }
      s.set(i, j, sv);
      si.set(i, j, siv);
    }
  }
  return {std::move(s), std::move(si)};
}

// ---------------------------------------------------------------------------
// eigenvalue counting and extremal eigenvalues by bisection

int count_eigenvalues_below(const SymMatrix& a, double sigma) {
  const double zero_tol = kZeroPivotRel * std::max(a.norm_inf(), 1.0);
  if (a.band() == Band::Tridiagonal)
    return sturm_inertia(a.diag(), a.off(), sigma, zero_tol).n_neg;
  SymMatrix s = a;
  for (int i = 0; i < a.size(); ++i) s.set(i, i, s(i, i) - sigma);
  return ldlt_inertia(s).inertia().n_neg;
}

namespace {

// Gershgorin bracket [lo, hi] containing the whole spectrum.
std::pair<double, double> gershgorin(const SymMatrix& a) {
  const int n = a.size();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  if (a.band() == Band::Tridiagonal) {
    for (int i = 0; i < n; ++i) {
      double r = 0.0;
      if (i > 0) r += std::abs(a.off()[i - 1]);
      if (i + 1 < n) r += std::abs(a.off()[i]);
      lo = std::min(lo, a.diag()[i] - r);
      hi = std::max(hi, a.diag()[i] + r);
    }
  } else {
    for (int i = 0; i < n; ++i) {
      double r = 0.0;
      for (int j = 0; j < n; ++j)
        if (j != i) r += std::abs(a(i, j));
      lo = std::min(lo, a(i, i) - r);
      hi = std::max(hi, a(i, i) + r);
    }
  }
  return {lo, hi};
}

double bisect_for_count(const SymMatrix& a, int target) {
  auto [lo, hi] = gershgorin(a);
  // invariant: count(lo) < target <= count(hi)
  for (int it = 0; it < 160; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (count_eigenvalues_below(a, mid) >= target)
      hi = mid;
    else
      lo = mid;
    if (hi - lo <= 1e-13 * std::max(1.0, std::abs(mid))) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double smallest_eigenvalue(const SymMatrix& a) { return bisect_for_count(a, 1); }

double largest_eigenvalue(const SymMatrix& a) {
  // largest of A = -(smallest of -A)
  if (a.band() == Band::Tridiagonal) {
    std::vector<double> d = a.diag(), e = a.off();
    for (double& v : d) v = -v;
    for (double& v : e) v = -v;
    return -smallest_eigenvalue(SymMatrix::tridiagonal(std::move(d), std::move(e)));
  }
  SymMatrix neg = SymMatrix::dense(a.size());
  for (int i = 0; i < a.size(); ++i)
    for (int j = 0; j <= i; ++j) neg.set(i, j, -a(i, j));
  return -smallest_eigenvalue(neg);
}

}  // namespace kgp
