#include "forcecbf/qp_oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/LU>

namespace forcecbf::qp {
namespace {

bool feasible(const QProblem& problem, const VecN& x, double slack) {
  for (const auto& c : problem.constraints) {
    if (c.row.dot(x) - c.bound > slack) return false;
  }
  return true;
}

}  // namespace

std::optional<VecN> brute_force_oracle(const QProblem& problem, double grid_step,
                                       const SearchBox& box, double feasibility_slack) {
  const int n = problem.dimension();
  if (n < 1 || n > 3) throw std::invalid_argument("brute_force_oracle: n must be 1..3");
  if (!(grid_step > 0.0)) throw std::invalid_argument("brute_force_oracle: grid_step must be > 0");
  if (box.lower.size() != n || box.upper.size() != n) {
    throw std::invalid_argument("brute_force_oracle: box dimension mismatch");
  }

  std::vector<long> counts(n);
  for (int j = 0; j < n; ++j) {
    counts[j] = static_cast<long>(std::floor((box.upper[j] - box.lower[j]) / grid_step + 1e-9)) + 1;
  }

  std::optional<VecN> best;
  double best_obj = std::numeric_limits<double>::infinity();
  std::vector<long> idx(n, 0);
  VecN x(n);
  while (true) {
    for (int j = 0; j < n; ++j) x[j] = box.lower[j] + static_cast<double>(idx[j]) * grid_step;
    if (feasible(problem, x, feasibility_slack)) {
      const double obj = problem.objective(x);
      if (obj < best_obj) {
        best_obj = obj;
        best = x;
      }
    }
    int j = 0;
    while (j < n && ++idx[j] == counts[j]) {
      idx[j] = 0;
      ++j;
    }
    if (j == n) break;
  }
  return best;
}

std::optional<VecN> enumeration_oracle(const QProblem& problem, double feasibility_tol) {
  const int n = problem.dimension();
  const int m = problem.num_constraints();
  if (m > 20) throw std::invalid_argument("enumeration_oracle: too many constraints");

  std::optional<VecN> best;
  double best_obj = std::numeric_limits<double>::infinity();

  const Eigen::VectorXd h = 2.0 * problem.cost_diagonal;
  const unsigned long subsets = 1ul << m;
  for (unsigned long mask = 0; mask < subsets; ++mask) {
    std::vector<int> rows;
    for (int i = 0; i < m; ++i) {
      if (mask & (1ul << i)) rows.push_back(i);
    }
    const int k = static_cast<int>(rows.size());
    if (k > n) continue;

    // [ H  A' ] [x ]   [-c]
    // [ A  0  ] [mu] = [ b]
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + k, n + k);
    Eigen::VectorXd rhs(n + k);
    K.topLeftCorner(n, n) = h.asDiagonal();
    rhs.head(n) = -problem.cost_linear;
    for (int j = 0; j < k; ++j) {
      const auto& c = problem.constraints[rows[j]];
      K.block(n + j, 0, 1, n) = c.row.transpose();
      K.block(0, n + j, n, 1) = c.row;
      rhs[n + j] = c.bound;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    lu.setThreshold(1e-11);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd sol = lu.solve(rhs);
    const VecN x = sol.head(n);
    if (!x.allFinite() || !feasible(problem, x, feasibility_tol)) continue;
    const double obj = problem.objective(x);
    if (obj < best_obj) {
      best_obj = obj;
      best = x;
    }
  }
  return best;
}

}  // namespace forcecbf::qp
