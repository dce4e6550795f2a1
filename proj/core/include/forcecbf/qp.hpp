#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace forcecbf::qp {

inline constexpr int kMaxVariables = 8;
inline constexpr int kMaxConstraints = 16;

using VecN = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxVariables, 1>;
using VecM = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxConstraints, 1>;

/// Tolerances used by solve(). Rows are normalized to unit length before
/// the feasibility test, so `feasibility` is a distance to the halfspace.
inline constexpr double kFeasibilityTol = 1e-10;
inline constexpr double kKktTol = 1e-8;

struct LinearInequality {
  VecN row;
  double bound = 0.0;  // row . x <= bound
};

/// minimize  sum_j d_j x_j^2 + c . x   subject to  row_i . x <= bound_i
///
/// d_j > 0 for every coordinate except possibly one "slack" coordinate that
/// may carry d_j = 0 together with c_j > 0 and a lower bound among the rows.
struct QProblem {
  VecN cost_diagonal;
  VecN cost_linear;
  std::vector<LinearInequality> constraints;

  QProblem() = default;
  explicit QProblem(int n) : cost_diagonal(VecN::Ones(n)), cost_linear(VecN::Zero(n)) {}

  int dimension() const { return static_cast<int>(cost_diagonal.size()); }
  int num_constraints() const { return static_cast<int>(constraints.size()); }

  void add_constraint(const VecN& row, double bound) { constraints.push_back({row, bound}); }

  double objective(const VecN& x) const;
};

enum class QpStatus { optimal, infeasible, iteration_limit };

std::string_view to_string(QpStatus s);

struct QSolution {
  VecN x_star;
  VecM multipliers;            // unused when not optimal; one entry per constraint
  std::vector<int> active_set; // constraint indices in the final working set, ascending
  double kkt_residual = 0.0;
  double objective = 0.0;
  QpStatus status = QpStatus::infeasible;
  int iterations = 0;
};

/// Breakdown of the KKT certificate, each term in max-norm.
struct KktReport {
  double stationarity = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  double complementarity = 0.0;

  double max() const;
};

/// Evaluates the KKT conditions of `problem` at (x, multipliers).
KktReport kkt_report(const QProblem& problem, const VecN& x, const VecM& multipliers);

/// Optional warm start carried between consecutive solves of the same
/// controller. Holds the previous primal point; never share across threads.
struct WarmStart {
  std::optional<VecN> x;
};

/// Dense primal active-set solve. Throws std::invalid_argument on a
/// malformed problem (dimension mismatch, size limits, non-finite data) and
/// std::domain_error when the objective is unbounded below.
QSolution solve(const QProblem& problem, WarmStart* warm = nullptr);

}  // namespace forcecbf::qp
