#include "svici/svi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "svici/kernels.hpp"

namespace svici {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::vector<std::size_t> SviProblem::active_z() const {
  std::vector<std::size_t> out;
  if (auto z = true_z()) {
    for (std::size_t j = 0; j < z->size(); ++j)
      if ((*z)[j] != 0.0) out.push_back(j);
  }
  return out;
}

std::vector<std::size_t> SviProblem::active_x() const {
  std::vector<std::size_t> out;
  if (auto x = true_x()) {
    for (std::size_t j = 0; j < x->size(); ++j)
      if ((*x)[j] != 0.0) out.push_back(j);
  }
  return out;
}

void SviProblem::verify_truth() const {
  auto z0 = true_z();
  if (!z0) return;
  const Vector x0 = feasible_set().project(*z0);
  if (auto x = true_x()) {
    for (std::size_t j = 0; j < x->size(); ++j)
      if (std::abs((*x)[j] - x0[j]) > 1e-10)
        throw Error("problem truth: x0 is not the projection of z0");
  }
  Vector r = matvec(mean_a(), x0) + mean_b() + *z0 - x0;
  if (norm_inf(r) > 1e-10 * (1.0 + norm_inf(mean_b())))
    throw Error("problem truth: normal-map residual " +
                std::to_string(norm_inf(r)));
}

SaaAssembly assemble_saa(const SviProblem& problem, std::size_t n_samples,
                         RngStream stream) {
  if (n_samples < 1) throw Error("assemble_saa: need at least one draw");
  const std::size_t n = problem.dim();
  SaaAssembly out;
  out.n_samples = n_samples;
  out.b_bar.assign(n, 0.0);
  Vector u(problem.variates_per_draw());
  if (const Matrix* fixed = problem.fixed_a()) {
    out.a_bar = *fixed;
    Matrix unused(0, 0);
    for (std::size_t i = 0; i < n_samples; ++i) {
      stream.fill_uniform(u.data(), u.size());
      problem.add_draw(u.data(), unused, out.b_bar);
    }
  } else {
    out.a_bar = Matrix(n, n);
    for (std::size_t i = 0; i < n_samples; ++i) {
      stream.fill_uniform(u.data(), u.size());
      problem.add_draw(u.data(), out.a_bar, out.b_bar);
    }
    const double inv = 1.0 / static_cast<double>(n_samples);
    for (std::size_t k = 0; k < n * n; ++k) out.a_bar.data()[k] *= inv;
  }
  const double inv = 1.0 / static_cast<double>(n_samples);
  for (double& v : out.b_bar) v *= inv;
  return out;
}

namespace {

// Sign pattern of z against the box: 0 free, -1 clamped at lower,
// +1 clamped at upper.
std::vector<int8_t> clamp_pattern(const Vector& z, const BoxSet& s) {
  std::vector<int8_t> p(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (z[j] <= s.lower[j])
      p[j] = -1;
    else if (z[j] >= s.upper[j])
      p[j] = 1;
    else
      p[j] = 0;
  }
  return p;
}

// Solves the linear system fixed by a clamp pattern:
//   rows F:  A_FF z_F = rhs_F
//   rows C:  z_i = rhs_i - A_iF z_F
// with rhs = -b - (A - I) c and c the clamp values.
Vector pattern_solve(const Matrix& a, const Vector& b, const BoxSet& s,
                     const std::vector<int8_t>& pat,
                     std::optional<std::size_t> bandwidth) {
  const std::size_t n = b.size();
  Vector c(n, 0.0);
  std::vector<std::size_t> free;
  free.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (pat[j] == 0)
      free.push_back(j);
    else
      c[j] = pat[j] < 0 ? s.lower[j] : s.upper[j];
  }
  Vector rhs = matvec(a, c);
  for (std::size_t j = 0; j < n; ++j) rhs[j] = -b[j] - rhs[j] + c[j];

  const std::size_t nf = free.size();
  Vector zf(nf);
  if (nf > 0) {
    Matrix aff(nf, nf);
    Vector rf(nf);
    for (std::size_t r = 0; r < nf; ++r) {
      rf[r] = rhs[free[r]];
      const double* arow = a.row(free[r]);
      for (std::size_t cc = 0; cc < nf; ++cc) aff(r, cc) = arow[free[cc]];
    }
    bool solved = false;
    if (bandwidth) {
      try {
        zf = BandCholesky::factor(aff, *bandwidth).solve(rf);
        solved = true;
      } catch (const NotPositiveDefinite&) {
        // fall through to the dense path
      }
    }
    if (!solved) zf = Lu::factor(aff).solve(rf);
  }
  Vector z = c;
  for (std::size_t r = 0; r < nf; ++r) z[free[r]] = zf[r];
  for (std::size_t j = 0; j < n; ++j) {
    if (pat[j] == 0) continue;
    double dot_f = 0.0;
    const double* arow = a.row(j);
    for (std::size_t r = 0; r < nf; ++r) dot_f += arow[free[r]] * zf[r];
    z[j] = rhs[j] - dot_f;
  }
  return z;
}

}  // namespace

std::pair<Vector, Vector> solve_normal_map(
    const Matrix& a_bar, const Vector& b_bar, const BoxSet& s,
    const Vector& start, std::optional<std::size_t> bandwidth) {
  const std::size_t n = b_bar.size();
  if (a_bar.rows() != n || a_bar.cols() != n || s.dim() != n ||
      start.size() != n)
    throw Error("solve_normal_map: dimension mismatch");

  std::vector<int8_t> pat = clamp_pattern(start, s);
  Vector z;
  const std::size_t max_switches = 2 * n + 4;
  bool stationary = false;
  for (std::size_t it = 0; it < max_switches; ++it) {
    try {
      z = pattern_solve(a_bar, b_bar, s, pat, bandwidth);
    } catch (const SingularMatrix&) {
      throw NoConvergence(
          "solve_normal_map: singular pattern system (homeomorphism "
          "assumption likely violated)");
    }
    std::vector<int8_t> next = clamp_pattern(z, s);
    if (next == pat) {
      stationary = true;
      break;
    }
    pat = std::move(next);
  }
  if (!stationary)
    throw NoConvergence("solve_normal_map: sign pattern did not settle in " +
                        std::to_string(max_switches) + " switches");

  Vector x = s.project(z);
  Vector r = matvec(a_bar, x) + b_bar + z - x;
  if (norm_inf(r) > 1e-9 * (1.0 + norm_inf(b_bar)))
    throw NoConvergence("solve_normal_map: residual " +
                        std::to_string(norm_inf(r)));
  return {std::move(z), std::move(x)};
}

Vector solve_lcp_lemke(const Matrix& m, const Vector& q) {
  const std::size_t n = q.size();
  if (m.rows() != n || m.cols() != n)
    throw Error("lemke: dimension mismatch");

  double qmin = 0.0;
  for (double v : q) qmin = std::min(qmin, v);
  if (qmin >= 0.0) return Vector(n, 0.0);

  // Tableau rows: w - M z - d z0 = q, columns [w | z | z0 | q],
  // d = ones. The w block holds B^{-1} and drives the lexicographic test.
  const std::size_t cols = 2 * n + 2;
  const std::size_t z0_col = 2 * n;
  const std::size_t q_col = 2 * n + 1;
  Matrix t(n, cols);
  for (std::size_t i = 0; i < n; ++i) {
    t(i, i) = 1.0;
    for (std::size_t j = 0; j < n; ++j) t(i, n + j) = -m(i, j);
    t(i, z0_col) = -1.0;
    t(i, q_col) = q[i];
  }
  std::vector<std::size_t> basis(n);
  for (std::size_t i = 0; i < n; ++i) basis[i] = i;  // w_i

  auto pivot = [&](std::size_t row, std::size_t col) {
    const double piv = t(row, col);
    for (std::size_t j = 0; j < cols; ++j) t(row, j) /= piv;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == row) continue;
      const double f = t(i, col);
      if (f != 0.0) kernels::axpy(-f, t.row(row), t.row(i), cols);
    }
  };

  // First pivot: z0 enters, most-negative q leaves.
  std::size_t row = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (t(i, q_col) < t(row, q_col)) row = i;
  std::size_t leaving = basis[row];
  basis[row] = z0_col;
  pivot(row, z0_col);

  const std::size_t max_iters = 500 + 50 * n;
  for (std::size_t it = 0; it < max_iters; ++it) {
    // Entering variable: complement of the one that just left.
    const std::size_t entering = leaving < n ? n + leaving : leaving - n;
    // Lexicographic ratio test over rows with positive column entry.
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (t(i, entering) <= 1e-12) continue;
      if (best == n) {
        best = i;
        continue;
      }
      // compare (q, B^{-1}) / col lexicographically
      const double ci = t(i, entering), cb = t(best, entering);
      double di = t(i, q_col) / ci - t(best, q_col) / cb;
      if (di < -1e-14) {
        best = i;
        continue;
      }
      if (di > 1e-14) continue;
      for (std::size_t k = 0; k < n; ++k) {
        double dk = t(i, k) / ci - t(best, k) / cb;
        if (dk < -1e-14) {
          best = i;
          break;
        }
        if (dk > 1e-14) break;
      }
    }
    if (best == n)
      throw RayTermination("lemke: ray termination, no complementary "
                           "solution found");
    leaving = basis[best];
    basis[best] = entering;
    pivot(best, entering);
    if (leaving == z0_col) {
      Vector x(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        if (basis[i] >= n && basis[i] < 2 * n)
          x[basis[i] - n] = std::max(0.0, t(i, q_col));
      return x;
    }
  }
  throw NoConvergence("lemke: iteration limit reached");
}

CovMatrix estimate_sigma(const SviProblem& problem, const SaaAssembly& saa,
                         const Vector& x_n, RngStream stream) {
  if (saa.n_samples < 2) throw Error("estimate_sigma: need at least 2 draws");
  const std::size_t n = problem.dim();
  // The sample mean of F(x_n, xi^i) equals A_bar x_n + b_bar exactly.
  Vector f_bar = matvec(saa.a_bar, x_n) + saa.b_bar;
  Matrix acc(n, n);
  Vector u(problem.variates_per_draw());
  Vector f(n);
  for (std::size_t i = 0; i < saa.n_samples; ++i) {
    stream.fill_uniform(u.data(), u.size());
    problem.apply_draw(u.data(), x_n, f);
    for (std::size_t j = 0; j < n; ++j) f[j] -= f_bar[j];
    kernels::syr_upper(acc.data(), n, f.data(), 1.0, n);
  }
  const double inv = 1.0 / static_cast<double>(saa.n_samples - 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      acc(i, j) *= inv;
      acc(j, i) = acc(i, j);
    }
  return CovMatrix::from_matrix(std::move(acc));
}

Matrix jacobian_mn(const Matrix& a_bar, const Vector& z_n, const BoxSet& s) {
  const std::size_t n = z_n.size();
  Cell cell = cell_of_point(s, z_n, classify_tol(z_n));
  std::string offending;
  for (std::size_t j = 0; j < n; ++j) {
    if (cell.pattern[j] == CoordCell::kAtLower ||
        cell.pattern[j] == CoordCell::kAtUpper) {
      if (!offending.empty()) offending += ",";
      offending += std::to_string(j);
    }
  }
  if (!offending.empty())
    throw DegenerateSolution(
        "jacobian: z_N lies on a cell boundary at coordinates {" + offending +
        "}");
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const bool selected = cell.pattern[j] == CoordCell::kInside;
      m(i, j) = selected ? a_bar(i, j) : (i == j ? 1.0 : 0.0);
    }
  return m;
}

SaaSolution solve_saa(const SviProblem& problem, std::size_t n_samples,
                      RngStream stream) {
  const BoxSet& s = problem.feasible_set();
  RngStream sigma_stream = stream;  // replays the same draws
  SaaAssembly saa = assemble_saa(problem, n_samples, stream);
  Vector start = Vector(saa.b_bar.size(), 0.0) - saa.b_bar;
  Vector z, x;
  try {
    std::tie(z, x) = solve_normal_map(saa.a_bar, saa.b_bar, s, start,
                                      problem.bandwidth());
  } catch (const NoConvergence&) {
    bool orthant = true;
    for (std::size_t j = 0; j < s.dim(); ++j)
      orthant = orthant && s.lower[j] == 0.0 && s.upper[j] == kInf;
    if (!orthant || s.dim() > 2000) throw;
    x = solve_lcp_lemke(saa.a_bar, saa.b_bar);
    z = x - (matvec(saa.a_bar, x) + saa.b_bar);
  }
  Matrix m_n = jacobian_mn(saa.a_bar, z, s);
  CovMatrix sigma = estimate_sigma(problem, saa, x, sigma_stream);
  Cell cell = cell_of_point(s, z, classify_tol(z));
  return SaaSolution{std::move(z),     std::move(x),
                     std::move(m_n),   std::move(sigma),
                     n_samples,        std::move(cell)};
}

SaaSolution solution_from_saa_data(const Matrix& a_bar, const Vector& b_bar,
                                   const BoxSet& s, CovMatrix sigma_n,
                                   std::size_t n_samples,
                                   std::optional<std::size_t> bandwidth) {
  Vector start = Vector(b_bar.size(), 0.0) - b_bar;
  auto [z, x] = solve_normal_map(a_bar, b_bar, s, start, bandwidth);
  Matrix m_n = jacobian_mn(a_bar, z, s);
  Cell cell = cell_of_point(s, z, classify_tol(z));
  return SaaSolution{std::move(z),   std::move(x),      std::move(m_n),
                     std::move(sigma_n), n_samples, std::move(cell)};
}

}  // namespace svici
