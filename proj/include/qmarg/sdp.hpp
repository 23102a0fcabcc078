#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qmarg/tensor.hpp"

namespace qmarg::sdp {

/// One block-diagonal Hermitian matrix, stored block by block.
using BlockMatrix = std::vector<Matrix>;

/// minimize c.x  subject to  F(x) = F_0 + sum_i x_i F_i >= 0.
/// Dual: maximize -Tr(F_0 Z) subject to Tr(F_i Z) = c_i, Z >= 0.
///
/// Every F_i shares the block structure `blocks`; a single block is the
/// monolithic form.
struct Problem {
  Eigen::VectorXd c;
  std::vector<int> blocks;
  /// f[0] is F_0, f[i] is F_i for i = 1..m.
  std::vector<BlockMatrix> f;

  int num_vars() const { return static_cast<int>(c.size()); }
  int dim() const;

  /// Single-block problem.
  static Problem monolithic(Eigen::VectorXd c, std::vector<Matrix> f);
  /// Same problem with all blocks merged into one block-diagonal matrix.
  Problem concatenated() const;

  /// F(x), block by block.
  BlockMatrix evaluate(const Eigen::VectorXd& x) const;
  /// Throws InvalidInput on mismatched sizes or non-Hermitian data.
  void validate() const;
};

struct Settings {
  double gap_tol = 1e-8;
  int max_iter = 200;
  double feas_tol = 1e-9;
  /// Re-solve the optimality conditions on the face identified at
  /// termination; kept only if every recomputed residual still holds.
  bool polish = true;
};

enum class Status { optimal, primal_infeasible, max_iterations, numerical_failure };

std::string to_string(Status s);

struct Residuals {
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;
  /// max_i |Tr(F_i Z) - c_i|
  double dual_infeasibility = 0.0;
  /// smallest eigenvalue of F(x)
  double primal_min_eig = 0.0;
  /// smallest eigenvalue of Z
  double dual_min_eig = 0.0;
  /// max-norm of F(x) Z
  double complementarity = 0.0;
};

struct Iterate {
  int iteration = 0;
  double primal_value = 0.0;
  double dual_value = 0.0;
  double mu = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double step_primal = 0.0;
  double step_dual = 0.0;
};

struct Solution {
  Status status = Status::numerical_failure;
  Eigen::VectorXd x;
  BlockMatrix z;
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;
  Residuals residuals;
  int iterations = 0;
  /// True when the returned pair came from the polishing step.
  bool polished = false;
  std::vector<Iterate> history;
};

/// Infeasible primal-dual path-following method (HKM direction with a
/// Mehrotra predictor-corrector step) on complex Hermitian blocks.
Solution solve(const Problem& p, const Settings& settings = {});

/// Recomputes every residual from (x, Z) alone.
Residuals residuals(const Problem& p, const Eigen::VectorXd& x, const BlockMatrix& z);
Residuals residuals(const Problem& p, const Solution& s);

}  // namespace qmarg::sdp
