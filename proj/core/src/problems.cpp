#include "bifurc/problems.hpp"

#include <cmath>
#include <stdexcept>

#include "bifurc/errors.hpp"

namespace bifurc {

namespace {

void check_dims(const ProblemSpec& spec, const Vector& u, const Vector& p) {
  if (u.size() != spec.n) throw dimension_error(spec.name + ": solution vector has wrong length");
  if (p.size() != spec.d) throw dimension_error(spec.name + ": parameter vector has wrong length");
}

std::size_t rank_by_singular_values(const DenseMatrix& m) {
  const Vector sv = singular_values(m);
  const double smax = sv.empty() ? 0.0 : sv.front();
  if (smax == 0.0) return 0;
  std::size_t r = 0;
  for (double s : sv)
    if (s > 1e-8 * smax) ++r;
  return r;
}

}  // namespace

Vector residual(const ProblemSpec& spec, const Vector& u, const Vector& p) {
  check_dims(spec, u, p);
  return spec.residual_fn(u, p);
}

DenseMatrix jac_u(const ProblemSpec& spec, const Vector& u, const Vector& p) {
  check_dims(spec, u, p);
  return spec.jac_u_fn(u, p);
}

DenseMatrix djac_u_dp(const ProblemSpec& spec, const Vector& u, const Vector& p, std::size_t k) {
  check_dims(spec, u, p);
  if (k >= spec.d) throw dimension_error(spec.name + ": parameter index out of range");
  if (spec.djac_dp_fn) return spec.djac_dp_fn(u, p, k);

  const double h = fd_step(p[k]);
  Vector pp = p, pm = p;
  pp[k] += h;
  pm[k] -= h;
  const DenseMatrix jp = spec.jac_u_fn(u, pp);
  const DenseMatrix jm = spec.jac_u_fn(u, pm);
  DenseMatrix out(jp.rows, jp.cols, 0.0);
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = (jp.data[i] - jm.data[i]) / (2.0 * h);
  return out;
}

bool range_space_check(const ProblemSpec& spec, const Vector& u, const Vector& p,
                       const Vector& v) {
  check_dims(spec, u, p);
  if (v.size() != spec.n) throw dimension_error(spec.name + ": direction vector has wrong length");
  if (std::abs(norm2(v) - 1.0) > 1e-6) throw argument_error("range_space_check: v must be unit");

  const DenseMatrix ju = jac_u(spec, u, p);
  DenseMatrix aug(spec.n, spec.n + 2 * spec.d, 0.0);
  for (std::size_t i = 0; i < spec.n; ++i)
    for (std::size_t j = 0; j < spec.n; ++j) aug(i, j) = ju(i, j);

  for (std::size_t k = 0; k < spec.d; ++k) {
    const Vector col = matvec(djac_u_dp(spec, u, p, k), v);
    for (std::size_t i = 0; i < spec.n; ++i) aug(i, spec.n + k) = col[i];
  }
  for (std::size_t k = 0; k < spec.d; ++k) {
    const double h = fd_step(p[k]);
    Vector pp = p, pm = p;
    pp[k] += h;
    pm[k] -= h;
    const Vector fp = spec.residual_fn(u, pp);
    const Vector fm = spec.residual_fn(u, pm);
    for (std::size_t i = 0; i < spec.n; ++i)
      aug(i, spec.n + spec.d + k) = (fp[i] - fm[i]) / (2.0 * h);
  }
  return rank_by_singular_values(aug) > rank_by_singular_values(ju);
}

// ---- ex1: x² − p ------------------------------------------------------------

ProblemSpec make_ex1_turning() {
  ProblemSpec spec;
  spec.name = "ex1_turning";
  spec.n = 1;
  spec.d = 1;
  spec.param_box = {{0.0, 2.0}};
  spec.residual_fn = [](const Vector& u, const Vector& p) -> Vector {
    return {u[0] * u[0] - p[0]};
  };
  spec.jac_u_fn = [](const Vector& u, const Vector&) -> DenseMatrix {
    DenseMatrix j(1, 1);
    j(0, 0) = 2.0 * u[0];
    return j;
  };
  spec.djac_dp_fn = [](const Vector&, const Vector&, std::size_t) -> DenseMatrix {
    return DenseMatrix(1, 1, 0.0);
  };
  return spec;
}

// ---- ex2: x² + bx + c -------------------------------------------------------

ProblemSpec make_ex2_quadratic() {
  ProblemSpec spec;
  spec.name = "ex2_quadratic";
  spec.n = 1;
  spec.d = 2;
  spec.param_box = {{-2.0, 2.0}, {0.0, 1.0}};
  spec.residual_fn = [](const Vector& u, const Vector& p) -> Vector {
    const double x = u[0], b = p[0], c = p[1];
    return {x * x + b * x + c};
  };
  spec.jac_u_fn = [](const Vector& u, const Vector& p) -> DenseMatrix {
    DenseMatrix j(1, 1);
    j(0, 0) = 2.0 * u[0] + p[0];
    return j;
  };
  spec.djac_dp_fn = [](const Vector&, const Vector&, std::size_t k) -> DenseMatrix {
    DenseMatrix j(1, 1, 0.0);
    j(0, 0) = (k == 0) ? 1.0 : 0.0;  // ∂(2x+b)/∂b = 1, ∂/∂c = 0
    return j;
  };
  return spec;
}

// ---- ex3: x³ + bx² + cx + d -------------------------------------------------

ProblemSpec make_ex3_cubic() {
  ProblemSpec spec;
  spec.name = "ex3_cubic";
  spec.n = 1;
  spec.d = 3;
  spec.param_box = {{0.0, 2.0}, {0.0, 4.0 / 3.0}, {-32.0 / 27.0, 8.0 / 27.0}};
  spec.residual_fn = [](const Vector& u, const Vector& p) -> Vector {
    const double x = u[0], b = p[0], c = p[1], d = p[2];
    return {((x + b) * x + c) * x + d};
  };
  spec.jac_u_fn = [](const Vector& u, const Vector& p) -> DenseMatrix {
    const double x = u[0], b = p[0], c = p[1];
    DenseMatrix j(1, 1);
    j(0, 0) = 3.0 * x * x + 2.0 * b * x + c;
    return j;
  };
  spec.djac_dp_fn = [](const Vector& u, const Vector&, std::size_t k) -> DenseMatrix {
    DenseMatrix j(1, 1, 0.0);
    if (k == 0) j(0, 0) = 2.0 * u[0];  // ∂(3x²+2bx+c)/∂b
    if (k == 1) j(0, 0) = 1.0;         // ∂/∂c
    return j;                          // ∂/∂d = 0
  };
  return spec;
}

// ---- ex4: u_xx = u²(u² − p) --------------------------------------------------

namespace {

// Discrete Laplacian row contribution at node i of m nodes with no-flux
// ghost at the left end and a homogeneous Dirichlet value beyond the right.
double ex4_laplacian(const Vector& u, std::size_t i) {
  const double h2 = kEx4Step * kEx4Step;
  const double left = (i == 0) ? u[1] : u[i - 1];  // ghost u₋₁ = u₁
  const double right = (i + 1 < kEx4Unknowns) ? u[i + 1] : 0.0;  // u(1) = 0
  return (left - 2.0 * u[i] + right) / h2;
}

}  // namespace

ProblemSpec make_ex4_bvp() {
  ProblemSpec spec;
  spec.name = "ex4_bvp";
  spec.n = kEx4Unknowns;
  spec.d = 1;
  spec.param_box = {{0.0, 40.0}};
  spec.residual_fn = [](const Vector& u, const Vector& p) -> Vector {
    Vector f(kEx4Unknowns, 0.0);
    for (std::size_t i = 0; i < kEx4Unknowns; ++i) {
      const double ui = u[i];
      f[i] = ex4_laplacian(u, i) - ui * ui * (ui * ui - p[0]);
    }
    return f;
  };
  spec.jac_u_fn = [](const Vector& u, const Vector& p) -> DenseMatrix {
    const double h2 = kEx4Step * kEx4Step;
    DenseMatrix j(kEx4Unknowns, kEx4Unknowns, 0.0);
    for (std::size_t i = 0; i < kEx4Unknowns; ++i) {
      const double ui = u[i];
      j(i, i) = -2.0 / h2 - (4.0 * ui * ui * ui - 2.0 * p[0] * ui);
      if (i > 0) j(i, i - 1) += 1.0 / h2;
      if (i + 1 < kEx4Unknowns) j(i, i + 1) += 1.0 / h2;
      if (i == 0) j(0, 1) += 1.0 / h2;  // ghost contribution doubles the off-diagonal
    }
    return j;
  };
  return spec;
}

// ---- ex5: Schnakenberg steady state -----------------------------------------

namespace {

double ex5_laplacian(const Vector& w, std::size_t base, std::size_t i) {
  const double h2 = kEx5Step * kEx5Step;
  const std::size_t last = kEx5Nodes - 1;
  const double left = (i == 0) ? w[base + 1] : w[base + i - 1];
  const double right = (i == last) ? w[base + last - 1] : w[base + i + 1];
  return (left - 2.0 * w[base + i] + right) / h2;
}

Vector ex5_residual(const Vector& w, double a, double b, double eta, double d) {
  Vector f(2 * kEx5Nodes, 0.0);
  for (std::size_t i = 0; i < kEx5Nodes; ++i) {
    const double u = w[i];
    const double v = w[kEx5Nodes + i];
    f[i] = ex5_laplacian(w, 0, i) + eta * (a - u + u * u * v);
    f[kEx5Nodes + i] = d * ex5_laplacian(w, kEx5Nodes, i) + eta * (b - u * u * v);
  }
  return f;
}

DenseMatrix ex5_jacobian(const Vector& w, double eta, double d) {
  const double h2 = kEx5Step * kEx5Step;
  const std::size_t m = kEx5Nodes;
  DenseMatrix j(2 * m, 2 * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double u = w[i];
    const double v = w[m + i];
    // u-equation row
    j(i, i) = -2.0 / h2 + eta * (-1.0 + 2.0 * u * v);
    if (i > 0) j(i, i - 1) += 1.0 / h2;
    if (i + 1 < m) j(i, i + 1) += 1.0 / h2;
    if (i == 0) j(i, 1) += 1.0 / h2;
    if (i == m - 1) j(i, m - 2) += 1.0 / h2;
    j(i, m + i) = eta * u * u;
    // v-equation row
    const std::size_t r = m + i;
    j(r, r) = -2.0 * d / h2 - eta * u * u;
    if (i > 0) j(r, r - 1) += d / h2;
    if (i + 1 < m) j(r, r + 1) += d / h2;
    if (i == 0) j(r, r + 1) += d / h2;
    if (i == m - 1) j(r, r - 1) += d / h2;
    j(r, i) = -eta * 2.0 * u * v;
  }
  return j;
}

}  // namespace

Vector schnakenberg_constant_state(double a, double b) {
  if (a + b == 0.0) throw argument_error("schnakenberg_constant_state: a + b must be nonzero");
  Vector w(2 * kEx5Nodes, 0.0);
  const double u = a + b;
  const double v = b / (u * u);
  for (std::size_t i = 0; i < kEx5Nodes; ++i) {
    w[i] = u;
    w[kEx5Nodes + i] = v;
  }
  return w;
}

ProblemSpec make_ex5_schnakenberg(const SchnakenbergParams& params, std::array<double, 2> d_box) {
  ProblemSpec spec;
  spec.name = "ex5_schnakenberg";
  spec.n = 2 * kEx5Nodes;
  spec.d = 1;
  spec.param_box = {d_box};
  const double a = params.a, b = params.b, eta = params.eta;
  spec.residual_fn = [a, b, eta](const Vector& w, const Vector& p) -> Vector {
    return ex5_residual(w, a, b, eta, p[0]);
  };
  spec.jac_u_fn = [eta](const Vector& w, const Vector& p) -> DenseMatrix {
    return ex5_jacobian(w, eta, p[0]);
  };
  return spec;
}

ProblemSpec make_ex5_schnakenberg_full(double a) {
  ProblemSpec spec;
  spec.name = "ex5_schnakenberg_full";
  spec.n = 2 * kEx5Nodes;
  spec.d = 3;  // (d, b, η)
  spec.param_box = {{30.0, 60.0}, {2.0 / 3.0, 2.0 / 3.0 + 4.0 / 30.0}, {45.0, 80.0}};
  spec.residual_fn = [a](const Vector& w, const Vector& p) -> Vector {
    return ex5_residual(w, a, p[1], p[2], p[0]);
  };
  spec.jac_u_fn = [](const Vector& w, const Vector& p) -> DenseMatrix {
    return ex5_jacobian(w, p[2], p[0]);
  };
  return spec;
}

ProblemSpec problem_by_name(const std::string& name) {
  if (name == "ex1_turning") return make_ex1_turning();
  if (name == "ex2_quadratic") return make_ex2_quadratic();
  if (name == "ex3_cubic") return make_ex3_cubic();
  if (name == "ex4_bvp") return make_ex4_bvp();
  if (name == "ex5_schnakenberg") return make_ex5_schnakenberg();
  throw argument_error("unknown problem: " + name);
}

std::vector<std::string> problem_names() {
  return {"ex1_turning", "ex2_quadratic", "ex3_cubic", "ex4_bvp", "ex5_schnakenberg"};
}

}  // namespace bifurc
