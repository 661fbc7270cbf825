#include "scimpc/c3.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <queue>
#include <sstream>

#include "scimpc/lcp.h"
#include "scimpc/qp.h"

namespace scimpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTerminalRidge = 1e-9;

// Active-set projection with a diagonal weight matrix:
//   minimize (y - v)' W (y - v)
//   s.t.     eq_i . y = eq_rhs_i,   lb_j <= in_j . y <= ub_j
// Small dense rows; the KKT solve is O(k^2 n) per iteration.
class DiagonalProjection {
 public:
  DiagonalProjection(const Eigen::VectorXd& weights, const Eigen::VectorXd& v)
      : w_inv_(weights.cwiseInverse()), v_(v), n_(static_cast<int>(v.size())) {}

  void add_equality(const Eigen::RowVectorXd& row, double rhs) {
    eq_rows_.push_back(row);
    eq_rhs_.push_back(rhs);
  }
  void add_inequality(const Eigen::RowVectorXd& row, double lb, double ub) {
    in_rows_.push_back(row);
    in_lb_.push_back(lb);
    in_ub_.push_back(ub);
  }

  // Returns the projected point; throws QpInfeasibleError when the
  // constraints cannot be met.
  Eigen::VectorXd solve() const {
    const int n_eq = static_cast<int>(eq_rows_.size());
    const int n_in = static_cast<int>(in_rows_.size());
    std::vector<std::pair<int, int>> active;  // (row, side)
    const int max_iter = 4 * (n_eq + n_in) + 16;

    Eigen::VectorXd y;
    Eigen::VectorXd alpha;
    for (int iter = 0; iter < max_iter; ++iter) {
      const int k = n_eq + static_cast<int>(active.size());
      if (k == 0) {
        y = v_;
      } else {
        Eigen::MatrixXd C(k, n_);
        Eigen::VectorXd t(k);
        for (int i = 0; i < n_eq; ++i) {
          C.row(i) = eq_rows_[i];
          t(i) = eq_rhs_[i];
        }
        for (size_t j = 0; j < active.size(); ++j) {
          const auto [row, side] = active[j];
          C.row(n_eq + j) = in_rows_[row];
          t(n_eq + j) = side > 0 ? in_ub_[row] : in_lb_[row];
        }
        const Eigen::MatrixXd CWi = C * w_inv_.asDiagonal();
        Eigen::LDLT<Eigen::MatrixXd> ldlt(CWi * C.transpose());
        if (ldlt.info() != Eigen::Success) {
          throw QpInfeasibleError("projection: dependent active constraints");
        }
        alpha = ldlt.solve(C * v_ - t);
        if (((CWi * C.transpose()) * alpha - (C * v_ - t)).lpNorm<Eigen::Infinity>() >
            1e-6 * std::max(1.0, t.lpNorm<Eigen::Infinity>())) {
          throw QpInfeasibleError("projection: inconsistent constraints");
        }
        y = v_ - w_inv_.asDiagonal() * (C.transpose() * alpha);
      }

      int worst_row = -1, worst_side = 0;
      double worst = 1e-10;
      for (int i = 0; i < n_in; ++i) {
        bool is_active = false;
        for (const auto& [row, side] : active) {
          if (row == i) { is_active = true; break; }
        }
        if (is_active) continue;
        const double val = in_rows_[i] * y;
        if (std::isfinite(in_ub_[i]) && val - in_ub_[i] > worst) {
          worst = val - in_ub_[i];
          worst_row = i;
          worst_side = +1;
        }
        if (std::isfinite(in_lb_[i]) && in_lb_[i] - val > worst) {
          worst = in_lb_[i] - val;
          worst_row = i;
          worst_side = -1;
        }
      }
      if (worst_row >= 0) {
        active.emplace_back(worst_row, worst_side);
        continue;
      }

      int drop = -1;
      double worst_mu = 1e-10;
      for (size_t j = 0; j < active.size(); ++j) {
        const double mu = alpha(n_eq + j);
        const double signed_mu = active[j].second > 0 ? mu : -mu;
        if (signed_mu < -worst_mu) {
          worst_mu = -signed_mu;
          drop = static_cast<int>(j);
        }
      }
      if (drop >= 0) {
        active.erase(active.begin() + drop);
        continue;
      }
      return y;
    }
    throw QpInfeasibleError("projection: active-set iteration limit");
  }

 private:
  Eigen::VectorXd w_inv_;
  Eigen::VectorXd v_;
  int n_ = 0;
  std::vector<Eigen::RowVectorXd> eq_rows_;
  std::vector<double> eq_rhs_;
  std::vector<Eigen::RowVectorXd> in_rows_;
  std::vector<double> in_lb_, in_ub_;
};

struct ProjectionContext {
  const Lcs* lcs = nullptr;
  const C3Config* config = nullptr;
  Eigen::VectorXd weights;
  int n_x = 0, n_u = 0, n_l = 0;

  Eigen::RowVectorXd lambda_row(int i) const {
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n_x + n_l + n_u);
    r(n_x + i) = 1.0;
    return r;
  }
  Eigen::RowVectorXd psi_row(int i) const {
    Eigen::RowVectorXd r(n_x + n_l + n_u);
    r << lcs->E.row(i), lcs->F.row(i), lcs->H.row(i);
    return r;
  }
  double psi_value(int i, const Eigen::VectorXd& y) const {
    return psi_row(i) * y + lcs->c(i);
  }
};

// Node relaxation: decided rows as equalities, relaxed cone everywhere
// (lambda in [0, lambda_max], psi >= 0, input box).
Eigen::VectorXd solve_node(const ProjectionContext& ctx, const Eigen::VectorXd& v,
                           const std::vector<int8_t>& assign, double* dist) {
  DiagonalProjection prob(ctx.weights, v);
  for (int i = 0; i < ctx.n_l; ++i) {
    if (assign[i] == 0) {
      prob.add_equality(ctx.lambda_row(i), 0.0);
      prob.add_inequality(ctx.psi_row(i), -ctx.lcs->c(i), kInf);
    } else if (assign[i] == 1) {
      prob.add_equality(ctx.psi_row(i), -ctx.lcs->c(i));
      prob.add_inequality(ctx.lambda_row(i), 0.0, ctx.config->lambda_max);
    } else {
      prob.add_inequality(ctx.lambda_row(i), 0.0, ctx.config->lambda_max);
      prob.add_inequality(ctx.psi_row(i), -ctx.lcs->c(i), kInf);
    }
  }
  for (int j = 0; j < ctx.n_u; ++j) {
    const double lo = ctx.config->u_min.size() > 0 ? ctx.config->u_min(j) : -kInf;
    const double hi = ctx.config->u_max.size() > 0 ? ctx.config->u_max(j) : kInf;
    if (std::isfinite(lo) || std::isfinite(hi)) {
      Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(ctx.n_x + ctx.n_l + ctx.n_u);
      r(ctx.n_x + ctx.n_l + j) = 1.0;
      prob.add_inequality(r, lo, hi);
    }
  }
  const Eigen::VectorXd y = prob.solve();
  *dist = (y - v).dot(ctx.weights.asDiagonal() * (y - v));
  return y;
}

struct BnbNode {
  double bound = 0.0;
  long seq = 0;
  std::vector<int8_t> assign;
};

struct BnbNodeCompare {
  bool operator()(const BnbNode& a, const BnbNode& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.seq > b.seq;
  }
};

}  // namespace

void C3Config::validate(const LcsDims& dims) const {
  auto fail = [](const char* what) {
    throw std::invalid_argument(std::string("C3Config: ") + what);
  };
  if (N < 1) fail("N must be >= 1");
  if (admm_iters < 1) fail("admm_iters must be >= 1");
  if (Q.rows() != dims.n_x || Q.cols() != dims.n_x) fail("Q shape");
  if (R.rows() != dims.n_u || R.cols() != dims.n_u) fail("R shape");
  if (g_x.size() != dims.n_x || g_lambda.size() != dims.n_lambda ||
      g_u.size() != dims.n_u) {
    fail("consensus weight shapes");
  }
  if (g_x.minCoeff() <= 0.0) fail("g_x must be positive");
  if (dims.n_lambda > 0 && g_lambda.minCoeff() <= 0.0) fail("g_lambda must be positive");
  if (dims.n_u > 0 && g_u.minCoeff() <= 0.0) fail("g_u must be positive");
  if (u_min.size() > 0 && u_min.size() != dims.n_u) fail("u_min shape");
  if (u_max.size() > 0 && u_max.size() != dims.n_u) fail("u_max shape");
}

Eigen::VectorXd C3Config::projection_weights(const LcsDims& dims) const {
  Eigen::VectorXd w(dims.n_x + dims.n_lambda + dims.n_u);
  w << g_x, g_lambda, g_u;
  return w;
}

Eigen::VectorXd project_step(const Eigen::VectorXd& point, const Lcs& lcs,
                             const C3Config& config) {
  const auto dims = lcs.dims();
  const int n_total = dims.n_x + dims.n_lambda + dims.n_u;
  if (point.size() != n_total) {
    throw std::invalid_argument("project_step: point size mismatch");
  }
  if (dims.n_lambda == 0) return point;

  ProjectionContext ctx;
  ctx.lcs = &lcs;
  ctx.config = &config;
  ctx.weights = config.projection_weights(dims);
  ctx.n_x = dims.n_x;
  ctx.n_u = dims.n_u;
  ctx.n_l = dims.n_lambda;

  const double scale = std::max(1.0, point.cwiseAbs().maxCoeff());
  const double comp_tol = 1e-11 * scale * scale;

  auto complementarity_ok = [&](const Eigen::VectorXd& y) {
    for (int i = 0; i < ctx.n_l; ++i) {
      const double li = y(ctx.n_x + i);
      const double pi = ctx.psi_value(i, y);
      if (std::min(li, pi) > comp_tol && li * pi > comp_tol) return false;
    }
    return true;
  };

  double best_dist = kInf;
  Eigen::VectorXd best;

  // Feasible seed: keep (x, clamped u), let the LCS's own LCP pick lambda.
  {
    Eigen::VectorXd y = point;
    for (int j = 0; j < ctx.n_u; ++j) {
      double uj = y(ctx.n_x + ctx.n_l + j);
      if (ctx.config->u_min.size() > 0) uj = std::max(uj, ctx.config->u_min(j));
      if (ctx.config->u_max.size() > 0) uj = std::min(uj, ctx.config->u_max(j));
      y(ctx.n_x + ctx.n_l + j) = uj;
    }
    try {
      const Eigen::VectorXd lam = lcp_solve(
          lcs.F, lcs.E * y.head(ctx.n_x) + lcs.H * y.tail(ctx.n_u) + lcs.c);
      if (lam.size() == ctx.n_l && lam.maxCoeff() <= config.lambda_max) {
        y.segment(ctx.n_x, ctx.n_l) = lam;
        best = y;
        best_dist = (y - point).dot(ctx.weights.asDiagonal() * (y - point));
      }
    } catch (const LcpRayTerminationError&) {
      // Seed unavailable; branch and bound proceeds without it.
    }
  }

  std::priority_queue<BnbNode, std::vector<BnbNode>, BnbNodeCompare> queue;
  long seq = 0;
  queue.push(BnbNode{0.0, seq++, std::vector<int8_t>(ctx.n_l, -1)});
  int nodes = 0;

  while (!queue.empty()) {
    const BnbNode node = queue.top();
    queue.pop();
    if (node.bound >= best_dist - 1e-12) break;  // best-first: queue exhausted
    if (++nodes > config.miqp_node_limit) break;

    Eigen::VectorXd y;
    double dist = 0.0;
    try {
      y = solve_node(ctx, point, node.assign, &dist);
    } catch (const QpInfeasibleError&) {
      continue;
    }
    if (dist >= best_dist - 1e-12) continue;

    if (complementarity_ok(y)) {
      best_dist = dist;
      best = y;
      continue;
    }

    // Branch on the most violated undecided row.
    int branch = -1;
    double worst = -1.0;
    for (int i = 0; i < ctx.n_l; ++i) {
      if (node.assign[i] != -1) continue;
      const double viol = std::min(y(ctx.n_x + i), ctx.psi_value(i, y));
      if (viol > worst) {
        worst = viol;
        branch = i;
      }
    }
    if (branch < 0) continue;  // fully assigned yet not complementary: numerical noise

    for (int8_t side : {int8_t{0}, int8_t{1}}) {
      BnbNode child;
      child.assign = node.assign;
      child.assign[branch] = side;
      child.bound = dist;
      child.seq = seq++;
      queue.push(std::move(child));
    }
  }

  if (!best.allFinite() || !std::isfinite(best_dist)) {
    throw ProjectionError("project_step: no feasible mode assignment found");
  }
  return best;
}

namespace {

double tracking_objective(const Lcs& lcs, const C3Config& config,
                          const Eigen::VectorXd& x_goal,
                          const std::vector<Eigen::VectorXd>& x,
                          const std::vector<Eigen::VectorXd>& u) {
  double obj = 0.0;
  for (int k = 0; k < config.N; ++k) {
    const Eigen::VectorXd ex = x[k] - x_goal;
    obj += ex.dot(config.Q * ex) + u[k].dot(config.R * u[k]);
  }
  const Eigen::VectorXd ex = x[config.N] - x_goal;
  obj += config.terminal_weight * ex.dot(config.Q * ex);
  return obj;
}

double complementarity_residual(const Lcs& lcs, const std::vector<Eigen::VectorXd>& x,
                                const std::vector<Eigen::VectorXd>& u,
                                const std::vector<Eigen::VectorXd>& lambda, int N) {
  double res = 0.0;
  for (int k = 0; k < N; ++k) {
    if (lambda[k].size() == 0) continue;
    const Eigen::VectorXd psi = lcs.E * x[k] + lcs.F * lambda[k] + lcs.H * u[k] + lcs.c;
    for (int i = 0; i < psi.size(); ++i) {
      res = std::max(res, -lambda[k](i));
      res = std::max(res, -psi(i));
      res = std::max(res, std::abs(lambda[k](i) * psi(i)));
    }
  }
  return res;
}

}  // namespace

C3Solution c3_solve(const Lcs& lcs, const Eigen::VectorXd& x_init,
                    const Eigen::VectorXd& x_goal, const C3Config& config,
                    ThreadPool* pool) {
  lcs.validate();
  const auto dims = lcs.dims();
  config.validate(dims);
  if (x_init.size() != dims.n_x || x_goal.size() != dims.n_x) {
    throw std::invalid_argument("c3_solve: state size mismatch");
  }
  if (!x_init.allFinite()) throw std::invalid_argument("c3_solve: x_init not finite");

  const int N = config.N;
  const int n_x = dims.n_x, n_u = dims.n_u, n_l = dims.n_lambda;
  const int n_step = n_x + n_l + n_u;
  const int n_vars = N * n_step + n_x;
  const int m_eq = (N + 1) * n_x;

  // Quadratic term: tracking + consensus penalty, terminal with a tiny ridge
  // so the factorization stays definite for semidefinite Q.
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n_vars, n_vars);
  for (int k = 0; k < N; ++k) {
    const int base = k * n_step;
    P.block(base, base, n_x, n_x) = 2.0 * config.Q;
    P.block(base, base, n_x, n_x).diagonal() += 2.0 * config.g_x;
    P.block(base + n_x, base + n_x, n_l, n_l).diagonal() = 2.0 * config.g_lambda;
    P.block(base + n_x + n_l, base + n_x + n_l, n_u, n_u) = 2.0 * config.R;
    P.block(base + n_x + n_l, base + n_x + n_l, n_u, n_u).diagonal() += 2.0 * config.g_u;
  }
  const int term = N * n_step;
  P.block(term, term, n_x, n_x) = 2.0 * config.terminal_weight * config.Q;
  P.block(term, term, n_x, n_x).diagonal().array() += kTerminalRidge;

  Eigen::MatrixXd A_eq = Eigen::MatrixXd::Zero(m_eq, n_vars);
  Eigen::VectorXd b_eq(m_eq);
  A_eq.block(0, 0, n_x, n_x).setIdentity();
  b_eq.head(n_x) = x_init;
  for (int k = 0; k < N; ++k) {
    const int row = (k + 1) * n_x;
    const int base = k * n_step;
    const int next_x = (k + 1 < N) ? (k + 1) * n_step : term;
    A_eq.block(row, next_x, n_x, n_x).setIdentity();
    A_eq.block(row, base, n_x, n_x) = -lcs.A;
    A_eq.block(row, base + n_x, n_x, n_l) = -lcs.D;
    A_eq.block(row, base + n_x + n_l, n_x, n_u) = -lcs.B;
    b_eq.segment(row, n_x) = lcs.d;
  }

  DenseQp qp(P, A_eq);
  {
    int n_rows = 0;
    for (int k = 0; k < N; ++k) n_rows += (config.u_min.size() > 0 || config.u_max.size() > 0) ? n_u : 0;
    n_rows += static_cast<int>(config.state_bounds.size()) * N;
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n_rows, n_vars);
    Eigen::VectorXd lb(n_rows), ub(n_rows);
    int r = 0;
    for (int k = 0; k < N; ++k) {
      if (config.u_min.size() > 0 || config.u_max.size() > 0) {
        for (int j = 0; j < n_u; ++j) {
          C(r, k * n_step + n_x + n_l + j) = 1.0;
          lb(r) = config.u_min.size() > 0 ? config.u_min(j) : -kInf;
          ub(r) = config.u_max.size() > 0 ? config.u_max(j) : kInf;
          ++r;
        }
      }
    }
    for (int k = 1; k <= N; ++k) {
      const int base = (k < N) ? k * n_step : term;
      for (const auto& sb : config.state_bounds) {
        C(r, base + sb.index) = 1.0;
        lb(r) = sb.lower;
        ub(r) = sb.upper;
        ++r;
      }
    }
    qp.set_inequalities(C.topRows(r), lb.head(r), ub.head(r));
  }

  std::vector<Eigen::VectorXd> delta(N, Eigen::VectorXd::Zero(n_step));
  std::vector<Eigen::VectorXd> dual(N, Eigen::VectorXd::Zero(n_step));
  const Eigen::VectorXd g_weights = config.projection_weights(dims);

  C3Solution sol;
  Eigen::VectorXd y(n_vars);

  auto unpack = [&](const Eigen::VectorXd& vars, C3Solution* out) {
    out->x.resize(N + 1);
    out->u.resize(N);
    out->lambda.resize(N);
    for (int k = 0; k < N; ++k) {
      const int base = k * n_step;
      out->x[k] = vars.segment(base, n_x);
      out->lambda[k] = vars.segment(base + n_x, n_l);
      out->u[k] = vars.segment(base + n_x + n_l, n_u);
    }
    out->x[N] = vars.segment(term, n_x);
  };

  const int iters = (n_l == 0) ? 1 : config.admm_iters;
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n_vars);
    for (int k = 0; k < N; ++k) {
      const int base = k * n_step;
      g.segment(base, n_x) = -2.0 * (config.Q * x_goal);
      const Eigen::VectorXd target = delta[k] - dual[k];
      g.segment(base, n_step) -= 2.0 * g_weights.cwiseProduct(target);
    }
    g.segment(term, n_x) = -2.0 * config.terminal_weight * (config.Q * x_goal);

    y = qp.solve(g, b_eq);
    unpack(y, &sol);

    if (n_l == 0) break;

    std::vector<Eigen::VectorXd> points(N);
    for (int k = 0; k < N; ++k) {
      points[k] = y.segment(k * n_step, n_step) + dual[k];
    }
    std::vector<Eigen::VectorXd> projected(N);
    std::exception_ptr failure = nullptr;
    std::mutex failure_mutex;
    auto run = [&](int k) {
      try {
        projected[k] = project_step(points[k], lcs, config);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    };
    if (pool != nullptr) {
      pool->parallel_for(N, run);
    } else {
      for (int k = 0; k < N; ++k) run(k);
    }
    if (failure) std::rethrow_exception(failure);

    double consensus_sq = 0.0;
    for (int k = 0; k < N; ++k) {
      delta[k] = projected[k];
      const Eigen::VectorXd gap = y.segment(k * n_step, n_step) - delta[k];
      dual[k] += gap;
      consensus_sq += gap.squaredNorm();
    }

    C3TraceRow row;
    row.iter = it;
    row.consensus_residual = std::sqrt(consensus_sq);
    row.comp_residual = complementarity_residual(lcs, sol.x, sol.u, sol.lambda, N);
    row.qp_cost = tracking_objective(lcs, config, x_goal, sol.x, sol.u);
    sol.trace.push_back(row);
  }

  sol.objective = tracking_objective(lcs, config, x_goal, sol.x, sol.u);
  sol.comp_residual = complementarity_residual(lcs, sol.x, sol.u, sol.lambda, N);
  sol.consensus_residual =
      sol.trace.empty() ? 0.0 : sol.trace.back().consensus_residual;
  return sol;
}

double c3_cost(const Eigen::VectorXd& x_sample, const Eigen::VectorXd& x_goal,
               const Lcs& lcs_at_sample, const C3Config& config,
               C3Solution* solution_out) {
  C3Solution sol = c3_solve(lcs_at_sample, x_sample, x_goal, config);
  const double cost = sol.objective;
  if (solution_out != nullptr) *solution_out = std::move(sol);
  return cost;
}

std::string trace_to_csv(const std::vector<C3TraceRow>& trace) {
  std::ostringstream out;
  out << "iter,consensus_residual,comp_residual,qp_cost\n";
  out.precision(17);
  for (const auto& row : trace) {
    out << row.iter << "," << row.consensus_residual << "," << row.comp_residual
        << "," << row.qp_cost << "\n";
  }
  return out.str();
}

}  // namespace scimpc
