#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace scimpc {

// 0 <= z  complementary to  M z + w >= 0.
struct LcpProblem {
  Eigen::MatrixXd M;
  Eigen::VectorXd w;
};

// Residual metrics for a candidate solution: negative parts of z and of
// M z + w, and the complementarity inner product.
struct LcpResiduals {
  double z_neg = 0.0;
  double slack_neg = 0.0;
  double comp = 0.0;

  double max() const { return std::max({z_neg, slack_neg, comp}); }
};

LcpResiduals lcp_residuals(const Eigen::MatrixXd& M, const Eigen::VectorXd& w,
                           const Eigen::VectorXd& z);

class LcpRayTerminationError : public std::runtime_error {
 public:
  LcpRayTerminationError(const std::string& what, Eigen::VectorXd best_z,
                         LcpResiduals best)
      : std::runtime_error(what), best_z(std::move(best_z)), best_residuals(best) {}

  Eigen::VectorXd best_z;
  LcpResiduals best_residuals;
};

// Lemke's complementary pivot method with lexicographic tie-breaking.
// Deterministic for fixed inputs; throws LcpRayTerminationError (carrying the
// best iterate) when the secondary ray is hit or pivots are exhausted.
Eigen::VectorXd lcp_solve(const Eigen::MatrixXd& M, const Eigen::VectorXd& w);

inline Eigen::VectorXd lcp_solve(const LcpProblem& p) { return lcp_solve(p.M, p.w); }

}  // namespace scimpc
