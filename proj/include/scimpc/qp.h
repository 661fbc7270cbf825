#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace scimpc {

class QpInfeasibleError : public std::runtime_error {
 public:
  explicit QpInfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

// Dense strictly convex QP
//   minimize 0.5 y'P y + g'y
//   s.t.     A y = b,   lb_i <= C_i y <= ub_i
// solved by eliminating the equalities through a prefactored range-space
// system and running an active-set loop over the inequality rows. P must be
// positive definite and A full row rank; both are fixed at construction so
// repeated solves (e.g. ADMM iterations) reuse the factorization.
class DenseQp {
 public:
  DenseQp(Eigen::MatrixXd P, Eigen::MatrixXd A_eq);

  void set_inequalities(Eigen::MatrixXd C, Eigen::VectorXd lb, Eigen::VectorXd ub);

  // Infeasible or degenerate-active-set problems throw QpInfeasibleError.
  Eigen::VectorXd solve(const Eigen::VectorXd& g, const Eigen::VectorXd& b) const;

  int num_vars() const { return n_; }

 private:
  struct KktResult {
    Eigen::VectorXd y;
  };

  // Solution of [P A'; A 0] [y; nu] = [r; s].
  Eigen::VectorXd kkt_solve(const Eigen::VectorXd& r, const Eigen::VectorXd& s) const;

  int n_ = 0;
  int m_eq_ = 0;
  Eigen::MatrixXd A_;
  Eigen::LLT<Eigen::MatrixXd> llt_P_;
  Eigen::MatrixXd P_inv_At_;
  Eigen::LLT<Eigen::MatrixXd> llt_S_;

  Eigen::MatrixXd C_;
  Eigen::VectorXd lb_, ub_;
  // Lazily cached kkt_solve(C_i, 0) columns, keyed by inequality row.
  mutable std::map<int, Eigen::VectorXd> row_response_;
};

}  // namespace scimpc
