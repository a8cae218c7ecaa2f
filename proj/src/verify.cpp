#include "kfss/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "kfss/error.hpp"
#include "kfss/linalg.hpp"
#include "kfss/parallel.hpp"

namespace kfss {

namespace {

constexpr double kUnitTolerance = 1e-10;
constexpr double kRankGap = 1e-12;

}  // namespace

TransformReport build_transform(const Matrix& g_l, const Vector& d) {
  const Index rows = g_l.rows();
  const Index l = g_l.cols();
  if (rows == 0 || rows % 3 != 0) throw DomainError("G_L must have 3m rows with m >= 1");
  if (d.size() != rows) throw DimensionMismatch("d must have one entry per row of G_L");
  if (l > rows / 3) throw DomainError("G_L may select at most m subsets");
  for (Index j = 0; j < l; ++j) {
    for (Index i = 0; i < rows; ++i) {
      if (g_l(i, j) != 0.0 && g_l(i, j) != 1.0) throw DomainError("G_L must be binary");
    }
    if (g_l.col(j).sum() != 3.0) throw DomainError("every column of G_L must hold three ones");
  }

  TransformReport report;
  std::vector<Index> covered;
  for (Index i = 0; i < rows; ++i) {
    if (g_l.row(i).isZero(0.0)) {
      report.uncovered.push_back(i);
    } else {
      covered.push_back(i);
    }
  }
  report.omega = report.uncovered.size();

  const auto k = static_cast<Index>(covered.size());
  Matrix basis = Matrix::Identity(k, k);
  Index r = 0;
  if (k > 0) {
    Matrix gc(l, k);
    for (Index j = 0; j < k; ++j) gc.col(j) = g_l.row(covered[j]).transpose();
    Eigen::JacobiSVD<Matrix> svd(gc, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    r = linalg::numerical_rank(gc, 1e-10);
    if (r > 0 && r < s.size() && s(r - 1) - s(r) < kRankGap) {
      throw RankDeficiencyError("rank of G_L is numerically ambiguous");
    }
    basis = svd.matrixV();
  }
  report.r = r;

  // Columns: uncovered canonical vectors, covered null space, row space.
  report.N = Matrix::Zero(rows, rows);
  Index col = 0;
  for (Index i : report.uncovered) report.N(i, col++) = 1.0;
  for (Index j = r; j < k; ++j, ++col) {
    for (Index t = 0; t < k; ++t) report.N(covered[t], col) = basis(t, j);
  }
  for (Index j = 0; j < r; ++j, ++col) {
    for (Index t = 0; t < k; ++t) report.N(covered[t], col) = basis(t, j);
  }

  const RowVector projected = d.transpose() * report.N;
  report.gamma = projected.head(rows - r);
  report.beta = projected.tail(r);
  report.Gtilde = g_l.transpose() * report.N.rightCols(r);
  return report;
}

TransformChecks check_transform(const TransformReport& report, const Matrix& g_l,
                                const Vector& d) {
  TransformChecks checks;
  const Index rows = report.N.rows();
  const Index l = g_l.cols();
  const Index r = report.r;
  checks.orthogonality =
      linalg::max_abs(report.N.transpose() * report.N - Matrix::Identity(rows, rows));

  Matrix stacked(l + 1, rows);
  stacked.row(0) = d.transpose();
  stacked.bottomRows(l) = g_l.transpose();
  Matrix block = Matrix::Zero(l + 1, rows);
  block.row(0).head(rows - r) = report.gamma;
  block.row(0).tail(r) = report.beta;
  block.bottomRightCorner(l, r) = report.Gtilde;
  checks.block = linalg::max_abs(stacked * report.N - block);

  for (Index j = 0; j < report.gamma.size(); ++j) {
    if (std::abs(report.gamma(j) - 1.0) <= kUnitTolerance) ++checks.unit_entries;
  }

  if (r == 0) {
    checks.gtilde_conditioning = 1.0;
    checks.row_reduction = 0.0;
  } else {
    Eigen::JacobiSVD<Matrix> svd(report.Gtilde);
    const auto& s = svd.singularValues();
    const Index smallest = std::min(report.Gtilde.rows(), r) - 1;
    checks.gtilde_conditioning = s(0) > 0.0 && smallest == r - 1 ? s(smallest) / s(0) : 0.0;
    const Matrix gt = report.Gtilde.transpose();
    const Vector y = gt.completeOrthogonalDecomposition().solve(report.beta.transpose());
    checks.row_reduction = (gt * y - report.beta.transpose()).cwiseAbs().maxCoeff();
  }
  return checks;
}

bool TransformChecks::passed(const TransformReport& report, bool expect_uncovered,
                             double tol) const {
  if (orthogonality > tol || block > tol || row_reduction > tol) return false;
  if (unit_entries < report.omega) return false;
  if (expect_uncovered && report.omega < 1) return false;
  return gtilde_conditioning > 1e-10;
}

bool unit_vector_in_rowspace(const Matrix& c, Index i) {
  if (c.rows() == 0) return false;
  Matrix augmented(c.rows() + 1, c.cols());
  augmented.topRows(c.rows()) = c;
  augmented.row(c.rows()).setZero();
  augmented(c.rows(), i) = 1.0;
  return linalg::numerical_rank(augmented, 1e-10) == linalg::numerical_rank(c, 1e-10);
}

bool Lemma1Report::all_passed() const {
  return std::all_of(cases.begin(), cases.end(), [](const Lemma1Case& c) { return c.passed; });
}

double Lemma1Report::max_residual() const {
  double worst = 0.0;
  for (const auto& c : cases) worst = std::max(worst, c.residual);
  return worst;
}

Lemma1Report check_lemma1(const SystemModel& sys, const SensorCatalog& catalog,
                          const Selection& sel, double tol) {
  const Matrix& a = sys.A();
  const Matrix& w = sys.W();
  if (!linalg::is_diagonal(a) || !linalg::is_diagonal(w)) {
    throw HypothesisViolation("A and W must be diagonal");
  }
  if (a.diagonal().cwiseAbs().maxCoeff() >= 1.0) {
    throw HypothesisViolation("every diagonal entry of A must lie strictly inside (-1, 1)");
  }
  if (!catalog.V().isZero(0.0)) throw HypothesisViolation("V must be zero");

  Lemma1Report report;
  report.sigma = solve_dare(sys, catalog, sel).sigma();
  const Matrix c = select_rows(catalog, sel).c;

  auto add = [&](char sub_case, Index i, double expected, double residual) {
    report.cases.push_back({sub_case, i, expected, report.sigma(i, i), residual, residual <= tol});
  };

  for (Index i = 0; i < sys.n(); ++i) {
    const double lambda = a(i, i);
    const double wii = w(i, i);
    const double sii = report.sigma(i, i);
    const double open_loop = wii / (1.0 - lambda * lambda);

    add('a', i, sii, std::max({0.0, wii - sii, sii - open_loop}));
    if (wii == 0.0) add('b', i, 0.0, std::abs(sii));
    if (lambda == 0.0) add('c', i, wii, std::abs(sii - wii));
    if (wii != 0.0 && (c.rows() == 0 || c.col(i).isZero(0.0))) {
      add('d', i, open_loop, std::abs(sii - open_loop));
    }
    if (unit_vector_in_rowspace(c, i)) add('e', i, wii, std::abs(sii - wii));
  }
  return report;
}

double sigma11_quadratic_form(double lambda1, double alpha_sq) {
  const double l2 = lambda1 * lambda1;
  const double inner = alpha_sq - alpha_sq * l2 - 1.0;
  return (1.0 + alpha_sq * l2 - alpha_sq + std::sqrt(inner * inner + 4.0 * alpha_sq)) / 2.0;
}

double sigma11_reciprocal_form(double lambda1, double alpha_sq) {
  const double shifted = 1.0 - lambda1 * lambda1 - 1.0 / alpha_sq;
  return 2.0 / (std::sqrt(shifted * shifted + 4.0 / alpha_sq) + shifted);
}

Lemma2Curve lemma2_curve(double lambda1, const std::vector<double>& alpha_grid) {
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    if (!(alpha_grid[i] >= 0.0) || !std::isfinite(alpha_grid[i])) {
      throw DomainError("alpha grid values must be finite and nonnegative");
    }
    if (i > 0 && alpha_grid[i] < alpha_grid[i - 1]) throw DomainError("alpha grid must be sorted");
  }

  Lemma2Curve curve;
  for (double alpha_sq : alpha_grid) {
    curve.points.emplace_back(alpha_sq, scalar_sigma11(lambda1, alpha_sq));
  }
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    if (!(curve.points[i].second > curve.points[i - 1].second)) curve.strictly_increasing = false;
  }
  if (!curve.points.empty() && curve.points.front().first == 0.0) {
    curve.starts_at_one = std::abs(curve.points.front().second - 1.0) <= 1e-12;
  }
  if (!curve.points.empty() && curve.points.back().first >= 1e10) {
    const double limit = 1.0 / (1.0 - lambda1 * lambda1);
    curve.reaches_limit = std::abs(curve.points.back().second - limit) <= 1e-6;
  }
  for (double alpha_sq : alpha_grid) {
    if (alpha_sq == 0.0) continue;
    const double gap = std::abs(sigma11_quadratic_form(lambda1, alpha_sq) -
                                sigma11_reciprocal_form(lambda1, alpha_sq));
    const double scale = std::max({1.0, alpha_sq, 1.0 / alpha_sq});
    curve.closed_form_gap = std::max(curve.closed_form_gap, gap / scale);
  }
  return curve;
}

double theorem3_limit_ratio(double lambda1) {
  return 2.0 / 3.0 + 1.0 / (3.0 * (1.0 - lambda1 * lambda1));
}

Theorem3Report theorem3_ratio(double lambda1, double h) {
  const auto inst = build_example1_instance(lambda1, h);
  const auto sigmas = theorem3_sigmas(lambda1, h);
  Theorem3Report report;
  report.greedy = greedy_select(inst.sys, inst.catalog, 2);
  report.optimal = exhaustive_select(inst.sys, inst.catalog, 2.0);
  report.ratio = ratio(report.greedy, report.optimal);
  report.predicted_greedy_trace = sigmas.s23 + 2.0;
  report.predicted_ratio = report.predicted_greedy_trace / 3.0;
  report.limit_ratio = theorem3_limit_ratio(lambda1);
  return report;
}

RandomDiagonalInstance random_diagonal_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> size(1, 6);
  std::uniform_real_distribution<double> eigen(-0.95, 0.95);
  std::uniform_real_distribution<double> noise(0.0, 2.0);
  std::bernoulli_distribution special(0.15);
  std::bernoulli_distribution bit(0.4);

  const int n = size(rng);
  const int q = size(rng);
  Matrix a = Matrix::Zero(n, n);
  Matrix w = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    a(i, i) = special(rng) ? 0.0 : eigen(rng);
    w(i, i) = special(rng) ? 0.0 : noise(rng);
  }
  Matrix c(q, n);
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < n; ++j) c(i, j) = bit(rng) ? 1.0 : 0.0;
  }
  return {SystemModel(std::move(a), std::move(w)), SensorCatalog::from_rows(c, Matrix::Zero(q, q))};
}

SuiteSummary run_lemma1_suite(std::uint64_t seed, std::size_t count, double tol) {
  struct Outcome {
    std::size_t cases = 0;
    std::size_t failures = 0;
    double worst = 0.0;
  };
  const auto outcomes = detail::parallel_map(count, [&](std::size_t k) {
    const auto inst = random_diagonal_instance(seed + k);
    const auto q = static_cast<std::size_t>(inst.catalog.q());
    Outcome out;
    for (unsigned long long bits = 0; bits < (1ULL << q); ++bits) {
      const auto report = check_lemma1(inst.sys, inst.catalog, Selection::from_bits(q, bits), tol);
      ++out.cases;
      if (!report.all_passed()) ++out.failures;
      out.worst = std::max(out.worst, report.max_residual());
    }
    return out;
  });

  SuiteSummary summary{"lemma1"};
  for (const auto& o : outcomes) {
    summary.cases += o.cases;
    summary.failures += o.failures;
    summary.worst = std::max(summary.worst, o.worst);
  }
  return summary;
}

std::vector<X3CInstance> x3c_no_pool() {
  return {
      X3CInstance(1, {}),
      X3CInstance(2, {{1, 2, 3}, {1, 4, 5}, {2, 4, 6}}),
      X3CInstance(2, {{1, 2, 3}, {1, 2, 4}, {3, 4, 5}}),
      X3CInstance(2, {{1, 2, 3}, {3, 4, 5}, {2, 5, 6}, {1, 4, 6}}),
      X3CInstance(3, {{1, 2, 3}, {4, 5, 6}, {1, 4, 7}, {2, 5, 8}, {6, 8, 9}}),
      X3CInstance(3, {{1, 2, 3}, {3, 4, 5}, {5, 6, 7}, {7, 8, 9}}),
      X3CInstance(3, {{1, 2, 4}, {1, 2, 5}, {1, 3, 6}, {2, 3, 7}, {4, 5, 6}}),
  };
}

SuiteSummary run_transform_suite(const std::vector<X3CInstance>& pool) {
  SuiteSummary summary{"transform"};
  for (const auto& x3c : pool) {
    const bool no_answer = !x3c_oracle(x3c).has_exact_cover;
    const Matrix g = incidence_matrix(x3c);
    const Vector d = Vector::Ones(g.rows());
    const auto tau = x3c.tau();
    const auto m = static_cast<std::size_t>(x3c.m());
    for (unsigned long long bits = 0; bits < (1ULL << tau); ++bits) {
      std::vector<Index> cols;
      for (std::size_t i = 0; i < tau; ++i) {
        if (bits >> i & 1ULL) cols.push_back(static_cast<Index>(i));
      }
      if (cols.size() > m) continue;
      Matrix g_l(g.rows(), static_cast<Index>(cols.size()));
      for (std::size_t j = 0; j < cols.size(); ++j) g_l.col(static_cast<Index>(j)) = g.col(cols[j]);

      ++summary.cases;
      try {
        const auto report = build_transform(g_l, d);
        const auto checks = check_transform(report, g_l, d);
        summary.worst = std::max({summary.worst, checks.orthogonality, checks.block,
                                  checks.row_reduction});
        if (!no_answer || !checks.passed(report, true)) ++summary.failures;
      } catch (const RankDeficiencyError&) {
        ++summary.failures;
      }
    }
  }
  return summary;
}

SuiteSummary run_lemma2_suite() {
  const std::vector<double> grid = {0.0, 1e-6, 1e-3, 0.1, 0.5, 1.0,  2.0,  4.0,
                                    10.0, 100.0, 1e4, 1e6, 1e8, 1e10};
  SuiteSummary summary{"lemma2"};
  for (double lambda1 : {0.1, 0.5, -0.5, 0.7, 0.9}) {
    const auto curve = lemma2_curve(lambda1, grid);
    ++summary.cases;
    summary.worst = std::max(summary.worst, curve.closed_form_gap);
    if (!curve.passed()) ++summary.failures;
  }
  return summary;
}

SuiteSummary run_theorem3_suite(const std::vector<double>& lambdas, const std::vector<double>& hs) {
  SuiteSummary summary{"theorem3"};
  for (double lambda1 : lambdas) {
    for (double h : hs) {
      const auto report = theorem3_ratio(lambda1, h);
      const double gap = std::abs(report.greedy.trace() - report.predicted_greedy_trace);
      ++summary.cases;
      summary.worst = std::max(summary.worst, gap);
      const bool ok = gap <= 1e-8 && std::abs(report.optimal.trace() - 3.0) <= 1e-8 &&
                      report.optimal.mu.to_mask() == "101";
      if (!ok) ++summary.failures;
    }
  }
  return summary;
}

}  // namespace kfss
