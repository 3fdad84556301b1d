#include "lexdiv/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lexdiv/error.hpp"

namespace lexdiv::linalg {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "multiply: shape mismatch");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto orow = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

Matrix multiply_at_b(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), "multiply_at_b: shape mismatch");
  Matrix out(a.cols(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto arow = a.row(r);
    auto brow = b.row(r);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double ai = arow[i];
      if (ai == 0.0) continue;
      auto orow = out.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += ai * brow[j];
    }
  }
  return out;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double x : a.data()) s += x * x;
  return std::sqrt(s);
}

Matrix subtract(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "subtract: shape mismatch");
  Matrix out = a;
  for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] -= b.data()[i];
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double cosine(std::span<const double> a, std::span<const double> b) {
  const double na = norm(a), nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

namespace {

// Fills columns of u whose norm is zero with unit vectors orthogonal to all
// other columns (modified Gram-Schmidt against the standard basis).
void complete_basis(Matrix& u, const std::vector<bool>& filled) {
  const std::size_t n = u.rows();
  std::size_t next_basis = 0;
  for (std::size_t c = 0; c < u.cols(); ++c) {
    if (filled[c]) continue;
    while (next_basis < n) {
      std::vector<double> v(n, 0.0);
      v[next_basis++] = 1.0;
      for (std::size_t o = 0; o < u.cols(); ++o) {
        if (o == c || (!filled[o] && o > c)) continue;
        double proj = 0.0;
        for (std::size_t r = 0; r < n; ++r) proj += u(r, o) * v[r];
        for (std::size_t r = 0; r < n; ++r) v[r] -= proj * u(r, o);
      }
      const double nv = norm(v);
      if (nv > 1e-8) {
        for (std::size_t r = 0; r < n; ++r) u(r, c) = v[r] / nv;
        break;
      }
    }
  }
}

}  // namespace

Svd jacobi_svd(const Matrix& m, double tol, int max_sweeps) {
  require(m.rows() == m.cols(), "jacobi_svd: square matrix expected");
  const std::size_t n = m.rows();
  Matrix w = m;  // columns get orthogonalized in place
  Matrix v = Matrix::identity(n);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          alpha += w(r, p) * w(r, p);
          beta += w(r, q) * w(r, q);
          gamma += w(r, p) * w(r, q);
        }
        if (gamma == 0.0 || std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t r = 0; r < n; ++r) {
          const double wp = w(r, p), wq = w(r, q);
          w(r, p) = c * wp - s * wq;
          w(r, q) = s * wp + c * wq;
          const double vp = v(r, p), vq = v(r, q);
          v(r, p) = c * vp - s * vq;
          v(r, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sigma(n);
  for (std::size_t c = 0; c < n; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < n; ++r) s += w(r, c) * w(r, c);
    sigma[c] = std::sqrt(s);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sigma[a] > sigma[b]; });

  Svd out{Matrix(n, n), std::vector<double>(n), Matrix(n, n)};
  const double smax = n ? sigma[order[0]] : 0.0;
  std::vector<bool> filled(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t c = order[k];
    out.sigma[k] = sigma[c];
    for (std::size_t r = 0; r < n; ++r) out.v(r, k) = v(r, c);
    if (sigma[c] > smax * 1e-13 && sigma[c] > 0.0) {
      for (std::size_t r = 0; r < n; ++r) out.u(r, k) = w(r, c) / sigma[c];
      filled[k] = true;
    }
  }
  complete_basis(out.u, filled);
  return out;
}

SymmetricEigen jacobi_eigen(const Matrix& sym, double tol, int max_sweeps) {
  require(sym.rows() == sym.cols(), "jacobi_eigen: square matrix expected");
  const std::size_t n = sym.rows();
  Matrix a = sym;
  Matrix v = Matrix::identity(n);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        total += a(i, j) * a(i, j);
        if (i != j) off += a(i, j) * a(i, j);
      }
    if (off <= tol * tol * total || off == 0.0) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  SymmetricEigen out{std::vector<double>(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

std::vector<double> cholesky_solve(const Matrix& a, std::span<const double> b) {
  require(a.rows() == a.cols() && a.rows() == b.size(), "cholesky_solve: shape mismatch");
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0) || !std::isfinite(d))
      fail(ErrorKind::Runtime, "matrix is not positive-definite");
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  std::vector<double> y(n), x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
    y[i] = s / l(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = y[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * x[k];
    x[i] = s / l(i, i);
  }
  return x;
}

double orthogonality_residual(const Matrix& q) {
  const Matrix qtq = multiply_at_b(q, q);
  double worst = 0.0;
  for (std::size_t i = 0; i < qtq.rows(); ++i)
    for (std::size_t j = 0; j < qtq.cols(); ++j)
      worst = std::max(worst, std::abs(qtq(i, j) - (i == j ? 1.0 : 0.0)));
  return worst;
}

}  // namespace lexdiv::linalg
