#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace horo {

/// Chart dimension of the supported sphere factors (S^1 and S^2).
inline constexpr int kMaxDim = 2;

inline constexpr double kPi = 3.14159265358979323846;

/// Fixed-capacity vector for per-point chart quantities, n in {1, 2}.
struct Vec {
  int n = 0;
  std::array<double, kMaxDim> a{};

  double& operator[](int i) { return a[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return a[static_cast<std::size_t>(i)]; }

  static Vec zero(int n) { return Vec{n, {}}; }
};

/// Fixed-capacity row-major matrix, n x n with n in {1, 2}.
struct Mat {
  int n = 0;
  std::array<double, kMaxDim * kMaxDim> a{};

  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i * n + j)]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i * n + j)]; }

  static Mat zero(int n) { return Mat{n, {}}; }
  static Mat identity(int n) {
    Mat m{n, {}};
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
  static Mat diag(int n, double d0, double d1 = 0.0) {
    Mat m{n, {}};
    m(0, 0) = d0;
    if (n > 1) m(1, 1) = d1;
    return m;
  }
};

inline Vec mul(const Mat& m, const Vec& v) {
  Vec r = Vec::zero(m.n);
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) r[i] += m(i, j) * v[j];
  return r;
}

inline Mat mul(const Mat& x, const Mat& y) {
  Mat r = Mat::zero(x.n);
  for (int i = 0; i < x.n; ++i)
    for (int j = 0; j < x.n; ++j)
      for (int k = 0; k < x.n; ++k) r(i, j) += x(i, k) * y(k, j);
  return r;
}

inline double dot(const Vec& x, const Vec& y) {
  double s = 0.0;
  for (int i = 0; i < x.n; ++i) s += x[i] * y[i];
  return s;
}

inline double quadratic_form(const Mat& m, const Vec& v) { return dot(v, mul(m, v)); }

inline double det(const Mat& m) {
  return m.n == 1 ? m(0, 0) : m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
}

inline double trace(const Mat& m) {
  double s = 0.0;
  for (int i = 0; i < m.n; ++i) s += m(i, i);
  return s;
}

inline Mat inverse(const Mat& m) {
  Mat r = Mat::zero(m.n);
  const double d = det(m);
  if (d == 0.0) throw std::domain_error("linalg: singular matrix");
  if (m.n == 1) {
    r(0, 0) = 1.0 / d;
  } else {
    r(0, 0) = m(1, 1) / d;
    r(0, 1) = -m(0, 1) / d;
    r(1, 0) = -m(1, 0) / d;
    r(1, 1) = m(0, 0) / d;
  }
  return r;
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
inline Mat cholesky(const Mat& m) {
  Mat l = Mat::zero(m.n);
  if (m(0, 0) <= 0.0) throw std::domain_error("linalg: matrix not positive definite");
  l(0, 0) = std::sqrt(m(0, 0));
  if (m.n == 2) {
    l(1, 0) = m(1, 0) / l(0, 0);
    const double d = m(1, 1) - l(1, 0) * l(1, 0);
    if (d <= 0.0) throw std::domain_error("linalg: matrix not positive definite");
    l(1, 1) = std::sqrt(d);
  }
  return l;
}

/// Eigenvalues of a symmetric matrix, ascending. Closed form for n <= 2.
inline Vec sym_eigenvalues(const Mat& m) {
  Vec e = Vec::zero(m.n);
  if (m.n == 1) {
    e[0] = m(0, 0);
    return e;
  }
  const double b = 0.5 * (m(0, 1) + m(1, 0));
  const double mean = 0.5 * (m(0, 0) + m(1, 1));
  const double disc = std::hypot(0.5 * (m(0, 0) - m(1, 1)), b);
  e[0] = mean - disc;
  e[1] = mean + disc;
  return e;
}

/// L^{-1} h L^{-T} for g = L L^T: symmetric and similar to g^{-1} h, so its
/// eigenvalues are the (real) eigenvalues of the mixed shape operator.
inline Mat cholesky_congruence(const Mat& g, const Mat& h) {
  const Mat l = cholesky(g);
  if (g.n == 1) {
    Mat r = Mat::zero(1);
    r(0, 0) = h(0, 0) / (l(0, 0) * l(0, 0));
    return r;
  }
  // forward solve L y = h (column-wise), then L z = y^T
  Mat y = Mat::zero(2);
  for (int j = 0; j < 2; ++j) {
    y(0, j) = h(0, j) / l(0, 0);
    y(1, j) = (h(1, j) - l(1, 0) * y(0, j)) / l(1, 1);
  }
  Mat z = Mat::zero(2);
  for (int j = 0; j < 2; ++j) {
    z(0, j) = y(j, 0) / l(0, 0);
    z(1, j) = (y(j, 1) - l(1, 0) * z(0, j)) / l(1, 1);
  }
  return z;
}

/// Dense LU with partial pivoting; used for the per-mode preconditioner solves.
class DenseLU {
 public:
  DenseLU() = default;

  explicit DenseLU(std::vector<double> a, int n) : n_(n), lu_(std::move(a)), piv_(n) {
    if (static_cast<int>(lu_.size()) != n * n)
      throw std::invalid_argument("DenseLU: size mismatch");
    for (int i = 0; i < n; ++i) piv_[static_cast<std::size_t>(i)] = i;
    for (int k = 0; k < n; ++k) {
      int p = k;
      double best = std::abs(at(k, k));
      for (int i = k + 1; i < n; ++i) {
        const double v = std::abs(at(i, k));
        if (v > best) {
          best = v;
          p = i;
        }
      }
      if (best == 0.0) throw std::domain_error("DenseLU: singular matrix");
      if (p != k) {
        for (int j = 0; j < n; ++j) std::swap(at(p, j), at(k, j));
        std::swap(piv_[static_cast<std::size_t>(p)], piv_[static_cast<std::size_t>(k)]);
      }
      for (int i = k + 1; i < n; ++i) {
        at(i, k) /= at(k, k);
        const double f = at(i, k);
        for (int j = k + 1; j < n; ++j) at(i, j) -= f * at(k, j);
      }
    }
  }

  void solve(std::span<const double> b, std::span<double> x) const {
    for (int i = 0; i < n_; ++i) x[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(piv_[static_cast<std::size_t>(i)])];
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < i; ++j) x[static_cast<std::size_t>(i)] -= at(i, j) * x[static_cast<std::size_t>(j)];
    for (int i = n_ - 1; i >= 0; --i) {
      for (int j = i + 1; j < n_; ++j) x[static_cast<std::size_t>(i)] -= at(i, j) * x[static_cast<std::size_t>(j)];
      x[static_cast<std::size_t>(i)] /= at(i, i);
    }
  }

  int size() const { return n_; }

 private:
  double& at(int i, int j) { return lu_[static_cast<std::size_t>(i * n_ + j)]; }
  double at(int i, int j) const { return lu_[static_cast<std::size_t>(i * n_ + j)]; }

  int n_ = 0;
  std::vector<double> lu_;
  std::vector<int> piv_;
};

struct GmresResult {
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

namespace detail {
inline double nrm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}
}  // namespace detail

/// Restarted GMRES, right-preconditioned: solves A M^{-1} y = b, x = M^{-1} y.
/// `apply_a` and `apply_m` map an input span to an output span of equal size.
template <class ApplyA, class ApplyM>
GmresResult gmres(ApplyA&& apply_a, ApplyM&& apply_m, std::span<const double> b,
                  std::span<double> x, int restart, int max_iter, double rtol) {
  const std::size_t n = b.size();
  const double bnorm = detail::nrm2(b);
  GmresResult result;
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    result.converged = true;
    return result;
  }

  std::vector<std::vector<double>> v;   // Krylov basis
  std::vector<std::vector<double>> zv;  // preconditioned basis vectors
  std::vector<double> h((static_cast<std::size_t>(restart) + 1) * static_cast<std::size_t>(restart), 0.0);
  std::vector<double> cs(static_cast<std::size_t>(restart)), sn(static_cast<std::size_t>(restart)),
      g(static_cast<std::size_t>(restart) + 1);
  std::vector<double> r(n), w(n), z(n);

  auto hij = [&](int i, int j) -> double& { return h[static_cast<std::size_t>(i * restart + j)]; };

  std::fill(x.begin(), x.end(), 0.0);
  double rel = 1.0;
  int total = 0;

  while (total < max_iter) {
    // r = b - A x
    if (total == 0) {
      std::copy(b.begin(), b.end(), r.begin());
    } else {
      apply_a(std::span<const double>(x), std::span<double>(w));
      for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - w[i];
    }
    double beta = detail::nrm2(r);
    rel = beta / bnorm;
    if (rel <= rtol) {
      result.converged = true;
      break;
    }
    v.assign(1, std::vector<double>(n));
    zv.clear();
    for (std::size_t i = 0; i < n; ++i) v[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;

    int k = 0;
    for (; k < restart && total < max_iter; ++k, ++total) {
      apply_m(std::span<const double>(v[static_cast<std::size_t>(k)]), std::span<double>(z));
      zv.push_back(z);
      apply_a(std::span<const double>(z), std::span<double>(w));
      // modified Gram-Schmidt
      for (int i = 0; i <= k; ++i) {
        double s = 0.0;
        for (std::size_t t = 0; t < n; ++t) s += w[t] * v[static_cast<std::size_t>(i)][t];
        hij(i, k) = s;
        for (std::size_t t = 0; t < n; ++t) w[t] -= s * v[static_cast<std::size_t>(i)][t];
      }
      const double hk1 = detail::nrm2(w);
      // apply accumulated Givens rotations
      for (int i = 0; i < k; ++i) {
        const double t1 = cs[static_cast<std::size_t>(i)] * hij(i, k) + sn[static_cast<std::size_t>(i)] * hij(i + 1, k);
        const double t2 = -sn[static_cast<std::size_t>(i)] * hij(i, k) + cs[static_cast<std::size_t>(i)] * hij(i + 1, k);
        hij(i, k) = t1;
        hij(i + 1, k) = t2;
      }
      const double denom = std::hypot(hij(k, k), hk1);
      if (denom == 0.0) {
        ++k;
        break;
      }
      cs[static_cast<std::size_t>(k)] = hij(k, k) / denom;
      sn[static_cast<std::size_t>(k)] = hk1 / denom;
      hij(k, k) = denom;
      g[static_cast<std::size_t>(k) + 1] = -sn[static_cast<std::size_t>(k)] * g[static_cast<std::size_t>(k)];
      g[static_cast<std::size_t>(k)] = cs[static_cast<std::size_t>(k)] * g[static_cast<std::size_t>(k)];
      rel = std::abs(g[static_cast<std::size_t>(k) + 1]) / bnorm;
      if (hk1 != 0.0 && rel > rtol && k + 1 < restart) {
        v.emplace_back(n);
        for (std::size_t t = 0; t < n; ++t) v.back()[t] = w[t] / hk1;
      } else {
        ++k;
        ++total;
        break;
      }
    }
    // back-substitute y and update x += Z y
    std::vector<double> y(static_cast<std::size_t>(k), 0.0);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k; ++j) s -= hij(i, j) * y[static_cast<std::size_t>(j)];
      y[static_cast<std::size_t>(i)] = s / hij(i, i);
    }
    for (int j = 0; j < k; ++j)
      for (std::size_t t = 0; t < n; ++t) x[t] += y[static_cast<std::size_t>(j)] * zv[static_cast<std::size_t>(j)][t];
    if (rel <= rtol) {
      result.converged = true;
      break;
    }
  }
  result.iterations = total;
  result.rel_residual = rel;
  return result;
}

}  // namespace horo
