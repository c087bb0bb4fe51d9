#include "blockselect/convergence_lab.hpp"

#include <cmath>
#include <stdexcept>

#include "blockselect/csv.hpp"
#include "blockselect/parallel.hpp"
#include "blockselect/rng.hpp"

namespace blockselect {

QuadraticProblem::QuadraticProblem(Eigen::MatrixXd A, Eigen::VectorXd b)
    : a_(std::move(A)), b_(std::move(b)) {
  if (a_.rows() != a_.cols() || a_.rows() == 0) {
    throw std::invalid_argument("QuadraticProblem: A must be square and nonempty");
  }
  if (b_.size() != a_.rows()) {
    throw std::invalid_argument("QuadraticProblem: b dimension mismatch");
  }
  if (!a_.isApprox(a_.transpose(), 1e-12)) {
    throw std::invalid_argument("QuadraticProblem: A must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a_);
  sigma_ = eig.eigenvalues().minCoeff();
  if (sigma_ <= 0.0) {
    throw std::invalid_argument("QuadraticProblem: A must be positive definite");
  }
  x_star_ = a_.llt().solve(b_);
  f_star_ = f(x_star_);
  l_max_ = a_.diagonal().maxCoeff();
}

QuadraticProblem QuadraticProblem::random_spd(std::size_t n, std::uint64_t seed,
                                              double lambda_min, double lambda_max) {
  if (n == 0) throw std::invalid_argument("random_spd: n must be >= 1");
  if (!(lambda_min > 0.0 && lambda_max >= lambda_min)) {
    throw std::invalid_argument("random_spd: need 0 < lambda_min <= lambda_max");
  }
  Rng rng(seed);
  Eigen::MatrixXd gaussian(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      gaussian(i, j) = rng.normal();
    }
  }
  const Eigen::MatrixXd q =
      Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian).householderQ();

  Eigen::VectorXd lambda(n);
  const double log_lo = std::log(lambda_min);
  const double log_hi = std::log(lambda_max);
  for (std::size_t i = 0; i < n; ++i) {
    lambda(i) = std::exp(rng.uniform(log_lo, log_hi));
  }
  // Pin the spectrum's ends so the conditioning is exactly as requested.
  lambda(0) = lambda_min;
  if (n > 1) lambda(n - 1) = lambda_max;

  Eigen::MatrixXd a = q * lambda.asDiagonal() * q.transpose();
  a = 0.5 * (a + a.transpose());  // enforce exact symmetry

  Eigen::VectorXd b(n);
  for (std::size_t i = 0; i < n; ++i) b(i) = rng.normal();
  return QuadraticProblem(std::move(a), std::move(b));
}

double QuadraticProblem::f(const Eigen::VectorXd& x) const {
  return 0.5 * x.dot(a_ * x) - b_.dot(x);
}

Eigen::VectorXd QuadraticProblem::gradient(const Eigen::VectorXd& x) const {
  return a_ * x - b_;
}

double estimate_r0(const QuadraticProblem& problem, const Eigen::VectorXd& x0) {
  const double gap = problem.f(x0) - problem.f_star();
  if (gap < 0.0 && gap > -1e-12) return 0.0;
  if (gap < 0.0) {
    throw std::invalid_argument("estimate_r0: f(x0) below the analytic optimum");
  }
  return std::sqrt(2.0 * gap / problem.sigma());
}

double sampled_sublevel_radius(const QuadraticProblem& problem, const Eigen::VectorXd& x0,
                               std::size_t n_samples, std::uint64_t seed) {
  const double gap = problem.f(x0) - problem.f_star();
  if (gap <= 0.0) return 0.0;
  const std::size_t n = problem.dim();
  Rng rng(seed);

  // For the boundary point along direction u: x = x* + t u with
  // t = sqrt(2 gap / u'Au), so ||x - x*|| is maximized by minimizing the
  // Rayleigh quotient of A.
  auto radius_for = [&](const Eigen::VectorXd& u) {
    const double quad = u.dot(problem.A() * u);
    return std::sqrt(2.0 * gap / quad) * u.norm();
  };

  Eigen::VectorXd best = Eigen::VectorXd::Zero(n);
  double best_radius = -1.0;
  Eigen::VectorXd u(n);
  for (std::size_t s = 0; s < n_samples; ++s) {
    for (std::size_t i = 0; i < n; ++i) u(i) = rng.normal();
    const double r = radius_for(u.normalized());
    if (r > best_radius) {
      best_radius = r;
      best = u.normalized();
    }
  }

  // Polish the best sampled direction: plain inverse iteration first (it
  // always drifts toward the smallest-curvature direction), then
  // Rayleigh-quotient iteration for the final digits.
  const Eigen::LLT<Eigen::MatrixXd> llt(problem.A());
  for (int iter = 0; iter < 100; ++iter) {
    best = llt.solve(best).normalized();
  }
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
  double mu = best.dot(problem.A() * best);
  for (int iter = 0; iter < 50; ++iter) {
    const Eigen::VectorXd solved = (problem.A() - mu * identity).fullPivLu().solve(best);
    if (!solved.allFinite() || solved.norm() == 0.0) break;
    const Eigen::VectorXd candidate = solved.normalized();
    const double mu_next = candidate.dot(problem.A() * candidate);
    if (mu_next > mu) break;  // drifting to a larger eigenvalue; keep best
    best = candidate;
    if (std::abs(mu_next - mu) <= 1e-15 * std::abs(mu_next)) {
      mu = mu_next;
      break;
    }
    mu = mu_next;
  }
  return radius_for(best);
}

std::vector<RcdTrajectory> rcd_minimize(const QuadraticProblem& problem,
                                        const Eigen::VectorXd& x0, std::size_t k_max,
                                        std::size_t n_seeds, std::uint64_t seed,
                                        int threads) {
  if (k_max < 1) throw std::invalid_argument("rcd_minimize: k_max must be >= 1");
  if (n_seeds < 1) throw std::invalid_argument("rcd_minimize: n_seeds must be >= 1");
  if (x0.size() != static_cast<Eigen::Index>(problem.dim())) {
    throw std::invalid_argument("rcd_minimize: x0 dimension mismatch");
  }
  const std::size_t n = problem.dim();
  const double f0 = problem.f(x0);

  std::vector<RcdTrajectory> trajectories(n_seeds);
  parallel_for(n_seeds, threads, [&](std::size_t s) {
    Rng rng(splitmix64(seed ^ (0x9e3779b97f4a7c15ull * (s + 1))));
    Eigen::VectorXd x = x0;
    Eigen::VectorXd grad = problem.gradient(x);
    double f_current = f0;
    auto& f_values = trajectories[s].f_values;
    f_values.reserve(k_max + 1);
    f_values.push_back(f_current);
    for (std::size_t k = 0; k < k_max; ++k) {
      const auto i = static_cast<Eigen::Index>(rng.uniform_u64(n));
      const double g = grad(i);
      const double aii = problem.A()(i, i);
      const double delta = -g / aii;
      x(i) += delta;
      grad += delta * problem.A().col(i);
      // Exact line step: the decrease has closed form, keeping the recorded
      // trajectory monotone by construction.
      f_current -= 0.5 * g * g / aii;
      f_values.push_back(f_current);
    }
  });
  return trajectories;
}

RateReport check_rate_bounds(const std::vector<RcdTrajectory>& trajectories,
                             const QuadraticProblem& problem, const Eigen::VectorXd& x0) {
  if (trajectories.empty()) {
    throw std::invalid_argument("check_rate_bounds: no trajectories");
  }
  const std::size_t k_max = trajectories.front().f_values.size() - 1;
  for (const auto& t : trajectories) {
    if (t.f_values.size() != k_max + 1) {
      throw std::invalid_argument("check_rate_bounds: ragged trajectories");
    }
  }
  RateReport report;
  report.n_seeds = trajectories.size();
  report.r0 = estimate_r0(problem, x0);
  report.initial_gap = std::max(problem.f(x0) - problem.f_star(), 0.0);

  const double n = static_cast<double>(problem.dim());
  const double rate_sublinear = 2.0 * n * problem.l_max() * report.r0 * report.r0;
  const double decay = 1.0 - problem.sigma() / (n * problem.l_max());
  const double n_seeds = static_cast<double>(trajectories.size());

  report.records.reserve(k_max);
  double bound_linear = report.initial_gap;
  for (std::size_t k = 1; k <= k_max; ++k) {
    bound_linear *= decay;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (const auto& t : trajectories) {
      // Non-negative by theory; the max guards last-digit drift of the
      // incremental f updates.
      const double gap = std::max(t.f_values[k] - problem.f_star(), 0.0);
      sum += gap;
      sum_sq += gap * gap;
    }
    RateRecord rec;
    rec.k = k;
    rec.mean_gap = sum / n_seeds;
    const double variance =
        std::max(sum_sq / n_seeds - rec.mean_gap * rec.mean_gap, 0.0);
    rec.std_error = n_seeds > 1 ? std::sqrt(variance / (n_seeds - 1)) : 0.0;
    rec.bound_sublinear = rate_sublinear / static_cast<double>(k);
    rec.bound_linear = bound_linear;
    const double tolerance = 3.0 * rec.std_error;
    rec.violation = rec.mean_gap > rec.bound_sublinear + tolerance ||
                    rec.mean_gap > rec.bound_linear + tolerance;
    if (rec.violation) ++report.violations;
    report.records.push_back(rec);
  }
  return report;
}

void write_rate_report_csv(const std::filesystem::path& path, const RateReport& report,
                           const std::string& comment_line) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(report.records.size());
  for (const auto& rec : report.records) {
    rows.push_back({std::to_string(rec.k), format_double(rec.mean_gap),
                    format_double(rec.bound_sublinear), format_double(rec.bound_linear)});
  }
  write_csv(path, {"k", "mean_gap", "bound5", "bound6"}, rows, comment_line);
}

}  // namespace blockselect
