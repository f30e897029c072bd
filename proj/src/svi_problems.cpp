#include <cmath>

#include "svici/svi.hpp"

namespace svici {

namespace {

// Triangular-mean uniform LCP family: A_ij ~ U(0,4) on the diagonal,
// U(0,3) above, U(0,2) below; b ranges select the example.
class TriangularLcp : public SviProblem {
 public:
  TriangularLcp(std::string name, std::size_t n, Vector b_lo, Vector b_hi,
                Vector z0)
      : name_(std::move(name)),
        n_(n),
        set_(BoxSet::orthant(n)),
        b_lo_(std::move(b_lo)),
        b_hi_(std::move(b_hi)),
        z0_(std::move(z0)) {}

  std::string name() const override { return name_; }
  std::size_t dim() const override { return n_; }
  const BoxSet& feasible_set() const override { return set_; }
  std::size_t variates_per_draw() const override { return n_ * n_ + n_; }

  void add_draw(const double* u, Matrix& a_acc, Vector& b_acc) const override {
    for (std::size_t i = 0; i < n_; ++i) {
      double* row = a_acc.row(i);
      const double* ur = u + i * n_;
      for (std::size_t j = 0; j < n_; ++j) row[j] += scale(i, j) * ur[j];
    }
    const double* ub = u + n_ * n_;
    for (std::size_t j = 0; j < n_; ++j)
      b_acc[j] += b_lo_[j] + (b_hi_[j] - b_lo_[j]) * ub[j];
  }

  void apply_draw(const double* u, const Vector& x,
                  Vector& f_out) const override {
    const double* ub = u + n_ * n_;
    for (std::size_t i = 0; i < n_; ++i) {
      const double* ur = u + i * n_;
      double acc = b_lo_[i] + (b_hi_[i] - b_lo_[i]) * ub[i];
      for (std::size_t j = 0; j < n_; ++j) acc += scale(i, j) * ur[j] * x[j];
      f_out[i] = acc;
    }
  }

  Matrix mean_a() const override {
    Matrix m(n_, n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) m(i, j) = 0.5 * scale(i, j);
    return m;
  }

  Vector mean_b() const override {
    Vector m(n_);
    for (std::size_t j = 0; j < n_; ++j) m[j] = 0.5 * (b_lo_[j] + b_hi_[j]);
    return m;
  }

  std::optional<Vector> true_z() const override { return z0_; }
  std::optional<Vector> true_x() const override { return set_.project(z0_); }

 private:
  double scale(std::size_t i, std::size_t j) const {
    if (i == j) return 4.0;
    return i < j ? 3.0 : 2.0;
  }

  std::string name_;
  std::size_t n_;
  BoxSet set_;
  Vector b_lo_, b_hi_;
  Vector z0_;
};

std::unique_ptr<SviProblem> make_lcp(int example, std::size_t n) {
  if (n < 3) throw Error("lcp examples need n >= 3");
  Vector b_lo(n), b_hi(n), z0(n, 0.0);
  // First two coordinates are strictly active; the b ranges for the rest
  // choose between strictly-inactive (z0 < 0) and degenerate (z0 = 0)
  // coordinates.
  const std::size_t m = (2 * n + 2) / 3;  // ceil(2n/3)
  for (std::size_t j = 0; j < n; ++j) {
    if (example != 1 && j < 2) {
      b_lo[j] = -2.0;
      b_hi[j] = 0.0;
    } else if (example == 1 || example == 3 || j < m) {
      b_lo[j] = -1.0;
      b_hi[j] = 1.0;
    } else {
      b_lo[j] = -1.0;
      b_hi[j] = -0.2;
    }
  }
  if (example != 1) {
    z0[0] = 0.2;
    z0[1] = 0.4;
    const std::size_t neg_end = example == 3 ? n : m;
    for (std::size_t j = 2; j < neg_end; ++j) z0[j] = -0.6;
  }
  auto p = std::make_unique<TriangularLcp>(
      "lcp-example" + std::to_string(example), n, std::move(b_lo),
      std::move(b_hi), std::move(z0));
  p->verify_truth();
  return p;
}

// Tridiagonal quadratic-program shape: deterministic PD M, random linear
// term with means arranged so the truth has the three-block structure
// x0 = [1...1, 0...0, 0...0], z0 = [1...1, -1...-1, 0...0].
class BandedQp : public SviProblem {
 public:
  explicit BandedQp(std::size_t n)
      : n_(n), set_(BoxSet::orthant(n)), m_(n, n), q_mean_(n), z0_(n, 0.0) {
    if (n % 3 != 0 || n < 6)
      throw Error("qp-banded needs a dimension divisible by 3 (n >= 6)");
    const std::size_t m = n / 3;
    for (std::size_t i = 0; i < n; ++i) {
      m_(i, i) = 4.0;
      if (i + 1 < n) {
        m_(i, i + 1) = 1.5;
        m_(i + 1, i) = 1.5;
      }
    }
    Vector x0(n, 0.0), f_target(n, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      x0[j] = 1.0;
      f_target[m + j] = 1.0;
      z0_[j] = 1.0;
      z0_[m + j] = -1.0;
    }
    Vector mx = matvec(m_, x0);
    for (std::size_t j = 0; j < n; ++j) q_mean_[j] = f_target[j] - mx[j];
  }

  std::string name() const override { return "qp-banded"; }
  std::size_t dim() const override { return n_; }
  const BoxSet& feasible_set() const override { return set_; }
  std::size_t variates_per_draw() const override { return n_; }
  const Matrix* fixed_a() const override { return &m_; }
  std::optional<std::size_t> bandwidth() const override { return 1; }

  void add_draw(const double* u, Matrix&, Vector& b_acc) const override {
    for (std::size_t j = 0; j < n_; ++j)
      b_acc[j] += q_mean_[j] - 1.0 + 2.0 * u[j];
  }

  void apply_draw(const double* u, const Vector& x,
                  Vector& f_out) const override {
    for (std::size_t i = 0; i < n_; ++i) {
      double acc = 4.0 * x[i];
      if (i > 0) acc += 1.5 * x[i - 1];
      if (i + 1 < n_) acc += 1.5 * x[i + 1];
      f_out[i] = acc + q_mean_[i] - 1.0 + 2.0 * u[i];
    }
  }

  Matrix mean_a() const override { return m_; }
  Vector mean_b() const override { return q_mean_; }
  std::optional<Vector> true_z() const override { return z0_; }
  std::optional<Vector> true_x() const override { return set_.project(z0_); }

 private:
  std::size_t n_;
  BoxSet set_;
  Matrix m_;
  Vector q_mean_;
  Vector z0_;
};

class CustomAffine : public SviProblem {
 public:
  explicit CustomAffine(CustomProblemDef def) : def_(std::move(def)) {
    const std::size_t n = def_.dim;
    if (def_.set.dim() != n || def_.a_lo.rows() != n || def_.a_lo.cols() != n ||
        def_.a_hi.rows() != n || def_.a_hi.cols() != n ||
        def_.b_lo.size() != n || def_.b_hi.size() != n)
      throw Error("custom problem: inconsistent dimensions");
    for (std::size_t k = 0; k < n * n; ++k)
      if (def_.a_lo.data()[k] > def_.a_hi.data()[k])
        throw Error("custom problem: a_lo > a_hi");
    for (std::size_t j = 0; j < n; ++j)
      if (def_.b_lo[j] > def_.b_hi[j])
        throw Error("custom problem: b_lo > b_hi");
  }

  std::string name() const override { return "custom"; }
  std::size_t dim() const override { return def_.dim; }
  const BoxSet& feasible_set() const override { return def_.set; }
  std::size_t variates_per_draw() const override {
    return def_.dim * def_.dim + def_.dim;
  }
  std::optional<std::size_t> bandwidth() const override { return def_.band; }

  void add_draw(const double* u, Matrix& a_acc, Vector& b_acc) const override {
    const std::size_t n = def_.dim;
    for (std::size_t k = 0; k < n * n; ++k)
      a_acc.data()[k] += def_.a_lo.data()[k] +
                         (def_.a_hi.data()[k] - def_.a_lo.data()[k]) * u[k];
    const double* ub = u + n * n;
    for (std::size_t j = 0; j < n; ++j)
      b_acc[j] += def_.b_lo[j] + (def_.b_hi[j] - def_.b_lo[j]) * ub[j];
  }

  void apply_draw(const double* u, const Vector& x,
                  Vector& f_out) const override {
    const std::size_t n = def_.dim;
    const double* ub = u + n * n;
    for (std::size_t i = 0; i < n; ++i) {
      double acc = def_.b_lo[i] + (def_.b_hi[i] - def_.b_lo[i]) * ub[i];
      const double* lo = def_.a_lo.row(i);
      const double* hi = def_.a_hi.row(i);
      const double* ur = u + i * n;
      for (std::size_t j = 0; j < n; ++j)
        acc += (lo[j] + (hi[j] - lo[j]) * ur[j]) * x[j];
      f_out[i] = acc;
    }
  }

  Matrix mean_a() const override {
    Matrix m = def_.a_lo + def_.a_hi;
    return 0.5 * m;
  }
  Vector mean_b() const override {
    Vector m(def_.dim);
    for (std::size_t j = 0; j < def_.dim; ++j)
      m[j] = 0.5 * (def_.b_lo[j] + def_.b_hi[j]);
    return m;
  }
  std::optional<Vector> true_z() const override { return def_.z0; }
  std::optional<Vector> true_x() const override {
    if (!def_.z0) return std::nullopt;
    return def_.set.project(*def_.z0);
  }

 private:
  CustomProblemDef def_;
};

}  // namespace

std::unique_ptr<SviProblem> make_builtin_problem(const std::string& name,
                                                 std::size_t n) {
  if (name == "lcp-example1") return make_lcp(1, n);
  if (name == "lcp-example2") return make_lcp(2, n);
  if (name == "lcp-example3") return make_lcp(3, n);
  if (name == "qp-banded") {
    auto p = std::make_unique<BandedQp>(n);
    p->verify_truth();
    return p;
  }
  throw Error("unknown problem: " + name);
}

std::unique_ptr<SviProblem> make_custom_problem(CustomProblemDef def) {
  auto p = std::make_unique<CustomAffine>(std::move(def));
  if (p->true_z()) p->verify_truth();
  return p;
}

}  // namespace svici
