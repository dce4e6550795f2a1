#include "forcecbf/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace forcecbf::qp {
namespace {

// Phase one adds one variable and one row.
constexpr int kMaxInner = kMaxVariables + 1;
constexpr int kMaxRows = kMaxConstraints + 1;

using IVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxInner, 1>;
using IMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxInner, kMaxInner>;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor, kMaxRows, kMaxInner>;
using RVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxRows, 1>;

constexpr double kZeroRow = 1e-14;
constexpr double kCurvatureTol = 1e-12;

// Working problem: minimize 1/2 x'Hx + g'x, H = diag(hdiag), s.t. A x <= b.
// Rows of A have unit length or are flagged unusable (identically zero).
struct Inner {
  IVec hdiag;
  IVec g;
  RowMat A;
  RVec b;
  std::vector<char> usable;
};

struct InnerResult {
  IVec x;
  std::vector<int> working;
  RVec mu;  // one per row of A
  int iterations = 0;
  bool converged = false;
};

bool independent_of(const RowMat& A, const std::vector<int>& working, int candidate) {
  const int n = static_cast<int>(A.cols());
  const int k = static_cast<int>(working.size());
  if (k + 1 > n) return false;
  IMat M(n, k + 1);
  for (int j = 0; j < k; ++j) M.col(j) = A.row(working[j]).transpose();
  M.col(k) = A.row(candidate).transpose();
  Eigen::ColPivHouseholderQR<IMat> qr(M);
  qr.setThreshold(1e-10);
  return qr.rank() == k + 1;
}

// Null-space primal active-set iteration from a feasible starting point.
// Handles a positive semidefinite diagonal Hessian by stepping along
// zero-curvature descent rays until a constraint blocks.
InnerResult active_set(const Inner& p, IVec x, int max_iter) {
  const int n = static_cast<int>(x.size());
  const int m = static_cast<int>(p.A.rows());

  InnerResult out;
  out.mu = RVec::Zero(m);

  // Initial working set: rows active at x, greedily kept independent.
  for (int i = 0; i < m; ++i) {
    if (!p.usable[i]) continue;
    const double slack = p.b[i] - p.A.row(i).dot(x);
    if (std::abs(slack) <= kFeasibilityTol && independent_of(p.A, out.working, i)) {
      out.working.push_back(i);
    }
  }

  for (int iter = 0; iter < max_iter; ++iter) {
    out.iterations = iter + 1;
    const IVec grad = p.hdiag.cwiseProduct(x) + p.g;
    const int k = static_cast<int>(out.working.size());
    const double grad_scale = 1.0 + grad.lpNorm<Eigen::Infinity>();

    IMat AW(n, k);
    for (int j = 0; j < k; ++j) AW.col(j) = p.A.row(out.working[j]).transpose();

    IMat Z;
    Eigen::HouseholderQR<IMat> qr;
    if (k == 0) {
      Z = IMat::Identity(n, n);
    } else {
      qr.compute(AW);
      const IMat Q = qr.householderQ() * IMat::Identity(n, n);
      Z = Q.rightCols(n - k);
    }

    IVec step = IVec::Zero(n);
    bool ray = false;
    const int r = n - k;
    if (r > 0) {
      const IMat Hr = Z.transpose() * p.hdiag.asDiagonal() * Z;
      const IVec gr = Z.transpose() * grad;
      Eigen::SelfAdjointEigenSolver<IMat> es(Hr);
      const IVec& ev = es.eigenvalues();
      const IMat& U = es.eigenvectors();
      const double curv_scale = std::max(1.0, ev.cwiseAbs().maxCoeff());

      IVec y_flat = IVec::Zero(r);
      IVec y_newton = IVec::Zero(r);
      for (int j = 0; j < r; ++j) {
        const double proj = U.col(j).dot(gr);
        if (ev[j] <= kCurvatureTol * curv_scale) {
          y_flat += proj * U.col(j);
        } else {
          y_newton += (proj / ev[j]) * U.col(j);
        }
      }
      if (y_flat.norm() > 1e-12 * grad_scale) {
        step = -(Z * y_flat);
        ray = true;
      } else {
        step = -(Z * y_newton);
      }
    }

    const double step_tol = 1e-12 * (1.0 + x.lpNorm<Eigen::Infinity>());
    if (!ray && step.lpNorm<Eigen::Infinity>() <= step_tol) {
      // Stationary on the current face: check multiplier signs.
      out.mu.setZero();
      if (k == 0) {
        out.converged = true;
        out.x = x;
        return out;
      }
      const IVec muW = qr.solve(IVec(-grad));
      int drop = -1;
      double most_negative = -1e-12 * grad_scale;
      for (int j = 0; j < k; ++j) {
        if (muW[j] < most_negative) {
          most_negative = muW[j];
          drop = j;
        }
      }
      if (drop < 0) {
        for (int j = 0; j < k; ++j) out.mu[out.working[j]] = std::max(0.0, muW[j]);
        out.converged = true;
        out.x = x;
        return out;
      }
      out.working.erase(out.working.begin() + drop);
      continue;
    }

    // Ratio test against rows outside the working set.
    double alpha = ray ? std::numeric_limits<double>::infinity() : 1.0;
    int blocking = -1;
    const double step_norm = step.norm();
    for (int i = 0; i < m; ++i) {
      if (!p.usable[i]) continue;
      if (std::find(out.working.begin(), out.working.end(), i) != out.working.end()) continue;
      const double ap = p.A.row(i).dot(step);
      if (ap <= 1e-14 * step_norm) continue;
      const double ratio = std::max(0.0, (p.b[i] - p.A.row(i).dot(x)) / ap);
      if (ratio < alpha) {
        alpha = ratio;
        blocking = i;
      }
    }
    if (blocking < 0 && ray) {
      throw std::domain_error("qp::solve: objective unbounded below");
    }
    x += alpha * step;
    if (blocking >= 0) {
      out.working.push_back(blocking);
      std::sort(out.working.begin(), out.working.end());
    }
  }
  out.x = x;
  out.converged = false;
  return out;
}

void validate(const QProblem& problem) {
  const int n = problem.dimension();
  if (n < 1 || n > kMaxVariables) {
    throw std::invalid_argument("qp::solve: dimension must be in [1, " +
                                std::to_string(kMaxVariables) + "], got " + std::to_string(n));
  }
  if (problem.cost_linear.size() != n) {
    throw std::invalid_argument("qp::solve: cost_linear size does not match dimension");
  }
  if (problem.num_constraints() > kMaxConstraints) {
    throw std::invalid_argument("qp::solve: too many constraints");
  }
  if (!problem.cost_diagonal.allFinite() || !problem.cost_linear.allFinite() ||
      (problem.cost_diagonal.array() < 0.0).any()) {
    throw std::invalid_argument("qp::solve: cost must be finite with non-negative diagonal");
  }
  for (const auto& c : problem.constraints) {
    if (c.row.size() != n) {
      throw std::invalid_argument("qp::solve: constraint row size does not match dimension");
    }
    if (!c.row.allFinite() || !std::isfinite(c.bound)) {
      throw std::invalid_argument("qp::solve: non-finite constraint data");
    }
  }
}

}  // namespace

double QProblem::objective(const VecN& x) const {
  return cost_diagonal.dot(x.cwiseAbs2()) + cost_linear.dot(x);
}

std::string_view to_string(QpStatus s) {
  switch (s) {
    case QpStatus::optimal: return "optimal";
    case QpStatus::infeasible: return "infeasible";
    case QpStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

double KktReport::max() const {
  return std::max({stationarity, primal, dual, complementarity});
}

KktReport kkt_report(const QProblem& problem, const VecN& x, const VecM& multipliers) {
  KktReport r;
  VecN station = 2.0 * problem.cost_diagonal.cwiseProduct(x) + problem.cost_linear;
  for (int i = 0; i < problem.num_constraints(); ++i) {
    const auto& c = problem.constraints[i];
    const double mu = multipliers[i];
    const double resid = c.row.dot(x) - c.bound;
    station += mu * c.row;
    r.primal = std::max(r.primal, resid);
    r.dual = std::max(r.dual, -mu);
    r.complementarity = std::max(r.complementarity, std::abs(mu * resid));
  }
  r.stationarity = station.lpNorm<Eigen::Infinity>();
  return r;
}

QSolution solve(const QProblem& problem, WarmStart* warm) {
  validate(problem);
  const int n = problem.dimension();
  const int m = problem.num_constraints();
  const int max_iter = 100 + 20 * (n + m);

  QSolution sol;
  sol.x_star = VecN::Zero(n);
  sol.multipliers = VecM::Zero(m);

  // Normalize rows; remember the scale to map multipliers back.
  Inner base;
  base.A.resize(m, n);
  base.b.resize(m);
  base.usable.assign(m, 1);
  RVec scale = RVec::Ones(m);
  for (int i = 0; i < m; ++i) {
    const auto& c = problem.constraints[i];
    const double norm = c.row.norm();
    if (norm <= kZeroRow) {
      if (c.bound < -kFeasibilityTol) {
        sol.status = QpStatus::infeasible;
        return sol;
      }
      base.usable[i] = 0;
      base.A.row(i).setZero();
      base.b[i] = 0.0;
      continue;
    }
    scale[i] = norm;
    base.A.row(i) = c.row.transpose() / norm;
    base.b[i] = c.bound / norm;
  }

  IVec x0 = IVec::Zero(n);
  if (warm != nullptr && warm->x && warm->x->size() == n && warm->x->allFinite()) {
    x0 = *warm->x;
  }

  double worst = 0.0;
  for (int i = 0; i < m; ++i) {
    if (base.usable[i]) worst = std::max(worst, base.A.row(i).dot(x0) - base.b[i]);
  }

  int iterations = 0;
  if (worst > kFeasibilityTol) {
    // Phase one: minimize t subject to A x - t <= b, t >= 0.
    Inner feas;
    feas.hdiag = IVec::Zero(n + 1);
    feas.g = IVec::Zero(n + 1);
    feas.g[n] = 1.0;
    feas.A.resize(m + 1, n + 1);
    feas.b.resize(m + 1);
    feas.usable = base.usable;
    feas.usable.push_back(1);
    for (int i = 0; i < m; ++i) {
      feas.A.row(i).head(n) = base.A.row(i);
      feas.A(i, n) = base.usable[i] ? -1.0 : 0.0;
      feas.b[i] = base.b[i];
    }
    feas.A.row(m).setZero();
    feas.A(m, n) = -1.0;
    feas.b[m] = 0.0;
    // Unit-length phase-one rows keep the activity test on one scale.
    for (int i = 0; i < m; ++i) {
      if (!feas.usable[i]) continue;
      const double norm = feas.A.row(i).norm();
      feas.A.row(i) /= norm;
      feas.b[i] /= norm;
    }

    IVec start(n + 1);
    start.head(n) = x0;
    start[n] = worst;
    const InnerResult phase1 = active_set(feas, start, max_iter);
    iterations += phase1.iterations;
    if (!phase1.converged) {
      sol.status = QpStatus::iteration_limit;
      sol.iterations = iterations;
      return sol;
    }
    x0 = phase1.x.head(n);
    double viol = 0.0;
    for (int i = 0; i < m; ++i) {
      if (base.usable[i]) viol = std::max(viol, base.A.row(i).dot(x0) - base.b[i]);
    }
    if (viol > kFeasibilityTol) {
      sol.status = QpStatus::infeasible;
      sol.iterations = iterations;
      return sol;
    }
  }

  base.hdiag = 2.0 * problem.cost_diagonal;
  base.g = problem.cost_linear;
  const InnerResult phase2 = active_set(base, x0, max_iter);
  iterations += phase2.iterations;

  sol.iterations = iterations;
  sol.x_star = phase2.x;
  if (!phase2.converged) {
    sol.status = QpStatus::iteration_limit;
    return sol;
  }
  for (int i = 0; i < m; ++i) sol.multipliers[i] = phase2.mu[i] / scale[i];
  sol.active_set = phase2.working;
  sol.status = QpStatus::optimal;
  sol.objective = problem.objective(sol.x_star);
  sol.kkt_residual = kkt_report(problem, sol.x_star, sol.multipliers).max();
  if (warm != nullptr) warm->x = sol.x_star;
  return sol;
}

}  // namespace forcecbf::qp
