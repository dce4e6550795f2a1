#pragma once

#include <optional>

#include "forcecbf/qp.hpp"

// Reference minimizers used to certify qp::solve in tests and in the
// validation suite. Neither shares code with the active-set path.
namespace forcecbf::qp {

struct SearchBox {
  VecN lower;
  VecN upper;
};

/// Exhaustive grid search over `box` with spacing `grid_step` (n <= 3).
/// Returns the feasible grid point of smallest objective, or nullopt when no
/// grid point is feasible. A point counts as feasible when every row is
/// satisfied within `feasibility_slack`.
std::optional<VecN> brute_force_oracle(const QProblem& problem, double grid_step,
                                       const SearchBox& box, double feasibility_slack = 1e-9);

/// Exact minimizer by enumerating every subset of at most n constraints,
/// solving the equality-constrained KKT system on each subset with a
/// full-pivot LU, and keeping the feasible stationary point with the lowest
/// objective. Exponential in the number of constraints; intended for small
/// instances only. nullopt means no feasible candidate exists.
std::optional<VecN> enumeration_oracle(const QProblem& problem, double feasibility_tol = 1e-9);

}  // namespace forcecbf::qp
