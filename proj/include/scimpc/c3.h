#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scimpc/lcs.h"
#include "scimpc/thread_pool.h"

namespace scimpc {

class ProjectionError : public std::runtime_error {
 public:
  explicit ProjectionError(const std::string& what) : std::runtime_error(what) {}
};

// Component bound on the state, applied at every step k = 1..N.
struct StateBound {
  int index = 0;
  double lower = -1e30;
  double upper = 1e30;
};

struct C3Config {
  int N = 5;
  int admm_iters = 3;
  Eigen::MatrixXd Q;        // per-step state cost, PSD
  Eigen::MatrixXd R;        // input cost, PD
  double terminal_weight = 1.0;  // Q_N = terminal_weight * Q

  // Consensus penalty G = diag([g_x; g_lambda; g_u]), PD.
  Eigen::VectorXd g_x, g_lambda, g_u;

  double lambda_max = 1e3;
  Eigen::VectorXd u_min, u_max;
  std::vector<StateBound> state_bounds;

  int miqp_node_limit = 20000;

  void validate(const LcsDims& dims) const;
  Eigen::VectorXd projection_weights(const LcsDims& dims) const;
};

struct C3TraceRow {
  int iter = 0;
  double consensus_residual = 0.0;
  double comp_residual = 0.0;
  double qp_cost = 0.0;
};

struct C3Solution {
  std::vector<Eigen::VectorXd> x;       // N + 1 states
  std::vector<Eigen::VectorXd> u;       // N inputs
  std::vector<Eigen::VectorXd> lambda;  // N contact impulses
  double objective = 0.0;
  double comp_residual = 0.0;
  double consensus_residual = 0.0;
  std::vector<C3TraceRow> trace;
};

// ADMM consensus solve of the LCS-constrained MPC problem: alternates a
// dynamics-feasible trajectory QP with per-step complementarity projections,
// scaled dual updates in between, for config.admm_iters iterations
// (deliberately suboptimal). The returned trajectory is the QP copy, so it
// satisfies the dynamics exactly. n_lambda == 0 reduces to the single QP.
// Projections run on `pool` when provided.
C3Solution c3_solve(const Lcs& lcs, const Eigen::VectorXd& x_init,
                    const Eigen::VectorXd& x_goal, const C3Config& config,
                    ThreadPool* pool = nullptr);

// G-weighted projection of one step's (x, lambda, u) copy onto
//   0 <= lambda  perp  E x + F lambda + H u + c >= 0
// with lambda <= lambda_max and the input box, solved exactly over per-row
// mode choices by bounded branch-and-bound (exhaustive with pruning for small
// row counts).
Eigen::VectorXd project_step(const Eigen::VectorXd& point, const Lcs& lcs,
                             const C3Config& config);

// Objective value of a c3_solve started from x_sample on an LCS linearized
// there; the sampling layer ranks switch candidates with it.
double c3_cost(const Eigen::VectorXd& x_sample, const Eigen::VectorXd& x_goal,
               const Lcs& lcs_at_sample, const C3Config& config,
               C3Solution* solution_out = nullptr);

// Per-iteration solver trace: "iter,consensus_residual,comp_residual,qp_cost".
std::string trace_to_csv(const std::vector<C3TraceRow>& trace);

}  // namespace scimpc
