#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace bifurc {

using Vector = std::vector<double>;

/// Dense row-major matrix. Small systems only (the Jacobians here are at
/// most a few dozen rows), so storage is a plain contiguous buffer.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major, rows*cols entries

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  bool square() const { return rows == cols; }
};

// ---- vector/matrix arithmetic --------------------------------------------

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& a);
double norm_inf(const Vector& a);
bool all_finite(const Vector& a);
bool all_finite(const DenseMatrix& m);

Vector matvec(const DenseMatrix& m, const Vector& x);
/// y = Mᵀ x without forming the transpose.
Vector matvec_t(const DenseMatrix& m, const Vector& x);
DenseMatrix transpose(const DenseMatrix& m);
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

// ---- factorizations and solves -------------------------------------------

struct SingularPair {
  double sigma_min = 0.0;
  Vector right_vector;  // unit 2-norm
};

/// Smallest singular value of a square matrix with its right singular
/// vector. Computed from a cyclic-Jacobi eigendecomposition of MᵀM; the
/// returned sigma is ‖M·v‖₂ for the computed vector v, so the pair is
/// self-consistent to rounding. Throws dimension_error for non-square input
/// and nonfinite_error for NaN/Inf entries.
SingularPair smallest_singular(const DenseMatrix& m);

/// All singular values of an m×n matrix, descending. Used for rank tests.
Vector singular_values(const DenseMatrix& m);

/// Solve M x = b by Gaussian elimination with partial pivoting. Throws
/// singular_matrix_error when a pivot falls below 1e-12 times the largest
/// entry of the original matrix.
Vector solve_linear(DenseMatrix m, Vector b);

using ResidualFn = std::function<Vector(const Vector&)>;
using JacobianFn = std::function<DenseMatrix(const Vector&)>;

/// Plain (undamped) Newton iteration: stops when ‖f(x)‖∞ ≤ tol. Throws
/// convergence_error (carrying the last iterate and its residual norm) when
/// max_iter steps do not reach tolerance or a step cannot be computed.
Vector newton_solve(const ResidualFn& f, const JacobianFn& jac, Vector x0,
                    double tol = 1e-10, std::size_t max_iter = 50);

/// Default finite-difference step for coordinate xi: 1e-5 · max(1, |xi|).
double fd_step(double xi);

/// Central difference (f(x+h·eᵢ) − f(x−h·eᵢ)) / (2h). Throws nonfinite_error
/// if either evaluation is NaN/Inf.
double central_diff(const std::function<double(const Vector&)>& f, const Vector& x,
                    std::size_t i, double h);

}  // namespace bifurc
