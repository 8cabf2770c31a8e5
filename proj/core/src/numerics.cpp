#include "bifurc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bifurc/errors.hpp"

namespace bifurc {

double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw dimension_error("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const Vector& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

bool all_finite(const Vector& a) {
  for (double x : a)
    if (!std::isfinite(x)) return false;
  return true;
}

bool all_finite(const DenseMatrix& m) {
  for (double x : m.data)
    if (!std::isfinite(x)) return false;
  return true;
}

Vector matvec(const DenseMatrix& m, const Vector& x) {
  if (m.cols != x.size()) throw dimension_error("matvec: size mismatch");
  Vector y(m.rows, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* row = &m.data[i * m.cols];
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) s += row[j] * x[j];
    y[i] = s;
  }
  return y;
}

Vector matvec_t(const DenseMatrix& m, const Vector& x) {
  if (m.rows != x.size()) throw dimension_error("matvec_t: size mismatch");
  Vector y(m.cols, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* row = &m.data[i * m.cols];
    const double xi = x[i];
    for (std::size_t j = 0; j < m.cols; ++j) y[j] += row[j] * xi;
  }
  return y;
}

DenseMatrix transpose(const DenseMatrix& m) {
  DenseMatrix t(m.cols, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
  return t;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols != b.rows) throw dimension_error("matmul: size mismatch");
  DenseMatrix c(a.rows, b.cols, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

namespace {

// Cyclic Jacobi eigendecomposition of a symmetric matrix. a is overwritten;
// on return w holds eigenvalues and the columns of v the eigenvectors.
// Plenty for the ≤ ~25×25 symmetric matrices this library produces.
void symmetric_eigen(DenseMatrix a, Vector& w, DenseMatrix& v) {
  const std::size_t n = a.rows;
  v = DenseMatrix(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-300) break;

    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a(i, i)));
    if (std::sqrt(off) <= 1e-16 * std::max(scale, 1e-300)) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        const double tau = (aqq - app) / (2.0 * apq);
        // smaller-magnitude root for a stable rotation
        const double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                      : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  w.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) w[i] = a(i, i);
}

DenseMatrix gram(const DenseMatrix& m) {
  // MᵀM, symmetric cols×cols
  DenseMatrix g(m.cols, m.cols, 0.0);
  for (std::size_t k = 0; k < m.rows; ++k) {
    const double* row = &m.data[k * m.cols];
    for (std::size_t i = 0; i < m.cols; ++i) {
      const double rki = row[i];
      if (rki == 0.0) continue;
      for (std::size_t j = i; j < m.cols; ++j) g(i, j) += rki * row[j];
    }
  }
  for (std::size_t i = 0; i < m.cols; ++i)
    for (std::size_t j = 0; j < i; ++j) g(i, j) = g(j, i);
  return g;
}

}  // namespace

SingularPair smallest_singular(const DenseMatrix& m) {
  if (!m.square() || m.rows == 0) throw dimension_error("smallest_singular: matrix must be square");
  if (!all_finite(m)) throw nonfinite_error("smallest_singular: non-finite entry");

  Vector w;
  DenseMatrix v;
  symmetric_eigen(gram(m), w, v);

  std::size_t imin = 0;
  for (std::size_t i = 1; i < w.size(); ++i)
    if (w[i] < w[imin]) imin = i;

  SingularPair out;
  out.right_vector.assign(m.cols, 0.0);
  for (std::size_t i = 0; i < m.cols; ++i) out.right_vector[i] = v(i, imin);
  const double nv = norm2(out.right_vector);
  for (double& x : out.right_vector) x /= nv;
  // Report ‖M v‖ rather than sqrt(eigenvalue): consistent with the returned
  // vector and immune to tiny negative eigenvalue roundoff.
  out.sigma_min = norm2(matvec(m, out.right_vector));
  return out;
}

Vector singular_values(const DenseMatrix& m) {
  if (m.rows == 0 || m.cols == 0) throw dimension_error("singular_values: empty matrix");
  if (!all_finite(m)) throw nonfinite_error("singular_values: non-finite entry");
  // Work with the smaller Gram matrix.
  const bool tall = m.rows >= m.cols;
  const DenseMatrix g = tall ? gram(m) : gram(transpose(m));
  Vector w;
  DenseMatrix v;
  symmetric_eigen(g, w, v);
  for (double& x : w) x = std::sqrt(std::max(0.0, x));
  std::sort(w.begin(), w.end(), std::greater<>());
  return w;
}

Vector solve_linear(DenseMatrix m, Vector b) {
  if (!m.square()) throw dimension_error("solve_linear: matrix must be square");
  const std::size_t n = m.rows;
  if (b.size() != n) throw dimension_error("solve_linear: rhs size mismatch");

  double max_entry = 0.0;
  for (double x : m.data) max_entry = std::max(max_entry, std::abs(x));
  const double pivot_tol = 1e-12 * std::max(max_entry, 1e-300);

  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    double best = std::abs(m(perm[col], col));
    for (std::size_t r = col + 1; r < n; ++r) {
      const double cand = std::abs(m(perm[r], col));
      if (cand > best) {
        best = cand;
        piv = r;
      }
    }
    if (best < pivot_tol)
      throw singular_matrix_error("solve_linear: pivot below tolerance at column " +
                                  std::to_string(col));
    std::swap(perm[col], perm[piv]);

    const std::size_t prow = perm[col];
    const double pivval = m(prow, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const std::size_t row = perm[r];
      const double factor = m(row, col) / pivval;
      if (factor == 0.0) continue;
      m(row, col) = 0.0;
      for (std::size_t c = col + 1; c < n; ++c) m(row, c) -= factor * m(prow, c);
      b[row] -= factor * b[prow];
    }
  }

  Vector x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    const std::size_t row = perm[i];
    double s = b[row];
    for (std::size_t j = i + 1; j < n; ++j) s -= m(row, j) * x[j];
    x[i] = s / m(row, i);
  }
  return x;
}

Vector newton_solve(const ResidualFn& f, const JacobianFn& jac, Vector x0, double tol,
                    std::size_t max_iter) {
  if (tol <= 0.0) throw argument_error("newton_solve: tol must be positive");
  Vector x = std::move(x0);
  Vector r = f(x);
  if (r.size() != x.size()) throw dimension_error("newton_solve: residual size mismatch");
  double rnorm = norm_inf(r);

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    if (!all_finite(r))
      throw convergence_error("newton_solve: non-finite residual", x, rnorm);
    if (rnorm <= tol) return x;
    Vector step;
    try {
      step = solve_linear(jac(x), r);
    } catch (const singular_matrix_error&) {
      throw convergence_error("newton_solve: singular Jacobian", x, rnorm);
    }
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= step[i];
    r = f(x);
    rnorm = norm_inf(r);
  }
  if (rnorm <= tol && all_finite(r)) return x;
  throw convergence_error("newton_solve: no convergence in " + std::to_string(max_iter) +
                              " iterations (residual " + std::to_string(rnorm) + ")",
                          x, rnorm);
}

double fd_step(double xi) { return 1e-5 * std::max(1.0, std::abs(xi)); }

double central_diff(const std::function<double(const Vector&)>& f, const Vector& x,
                    std::size_t i, double h) {
  if (i >= x.size()) throw dimension_error("central_diff: index out of range");
  if (h <= 0.0) throw argument_error("central_diff: step must be positive");
  Vector xp = x, xm = x;
  xp[i] += h;
  xm[i] -= h;
  const double fp = f(xp);
  const double fm = f(xm);
  if (!std::isfinite(fp) || !std::isfinite(fm))
    throw nonfinite_error("central_diff: non-finite function value");
  return (fp - fm) / (2.0 * h);
}

}  // namespace bifurc
