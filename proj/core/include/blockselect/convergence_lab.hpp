#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace blockselect {

/// Strongly convex quadratic f(x) = 0.5 x'Ax - b'x with its analytic
/// optimum, strong-convexity constant and per-coordinate Lipschitz constants.
class QuadraticProblem {
 public:
  QuadraticProblem(Eigen::MatrixXd A, Eigen::VectorXd b);

  /// A = Q diag(lambda) Q' with a log-uniform spectrum pinned to
  /// [lambda_min, lambda_max] and Q from the QR of a seeded Gaussian matrix.
  static QuadraticProblem random_spd(std::size_t n, std::uint64_t seed,
                                     double lambda_min = 1.0, double lambda_max = 20.0);

  double f(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;

  const Eigen::MatrixXd& A() const { return a_; }
  const Eigen::VectorXd& b() const { return b_; }
  const Eigen::VectorXd& x_star() const { return x_star_; }
  double f_star() const { return f_star_; }
  double sigma() const { return sigma_; }  // lambda_min(A)
  double coord_lipschitz(std::size_t i) const { return a_(i, i); }
  double l_max() const { return l_max_; }
  std::size_t dim() const { return static_cast<std::size_t>(a_.rows()); }

 private:
  Eigen::MatrixXd a_;
  Eigen::VectorXd b_;
  Eigen::VectorXd x_star_;
  double f_star_ = 0.0;
  double sigma_ = 0.0;
  double l_max_ = 0.0;
};

/// Exact sublevel-set radius for quadratics: sqrt(2 (f(x0) - f*) / sigma).
double estimate_r0(const QuadraticProblem& problem, const Eigen::VectorXd& x0);

/// Independent cross-check: the largest ||x - x*|| over points of the
/// boundary ellipsoid {f(x) = f(x0)}, from random direction sampling with an
/// inverse-iteration polish of the best direction found.
double sampled_sublevel_radius(const QuadraticProblem& problem, const Eigen::VectorXd& x0,
                               std::size_t n_samples, std::uint64_t seed);

struct RcdTrajectory {
  std::vector<double> f_values;  // f after step k; index 0 holds f(x0)
};

/// Randomized coordinate descent with exact 1-D minimization:
/// x_i <- x_i - [grad f(x)]_i / A_ii on a uniformly random coordinate.
std::vector<RcdTrajectory> rcd_minimize(const QuadraticProblem& problem,
                                        const Eigen::VectorXd& x0, std::size_t k_max,
                                        std::size_t n_seeds, std::uint64_t seed,
                                        int threads = 1);

struct RateRecord {
  std::size_t k = 0;
  double mean_gap = 0.0;  // E[f(x_k)] - f* over seeds
  double std_error = 0.0;
  double bound_sublinear = 0.0;  // 2 n L_max R0^2 / k
  double bound_linear = 0.0;     // (1 - sigma/(n L_max))^k (f(x0) - f*)
  bool violation = false;        // mean gap above either bound beyond 3 SE
};

struct RateReport {
  std::vector<RateRecord> records;  // k = 1..k_max
  double r0 = 0.0;
  double initial_gap = 0.0;  // f(x0) - f*
  std::size_t n_seeds = 0;
  std::size_t violations = 0;
};

RateReport check_rate_bounds(const std::vector<RcdTrajectory>& trajectories,
                             const QuadraticProblem& problem, const Eigen::VectorXd& x0);

/// Columns: k, mean_gap, bound5, bound6.
void write_rate_report_csv(const std::filesystem::path& path, const RateReport& report,
                           const std::string& comment_line = "");

}  // namespace blockselect
