#include "scimpc/qp.h"

#include <algorithm>
#include <cmath>

namespace scimpc {

namespace {
constexpr double kFeasTol = 1e-9;
constexpr double kDualTol = 1e-9;
}  // namespace

DenseQp::DenseQp(Eigen::MatrixXd P, Eigen::MatrixXd A_eq)
    : n_(static_cast<int>(P.rows())),
      m_eq_(static_cast<int>(A_eq.rows())),
      A_(std::move(A_eq)) {
  if (P.cols() != n_ || (m_eq_ > 0 && A_.cols() != n_)) {
    throw std::invalid_argument("DenseQp: shape mismatch");
  }
  llt_P_.compute(P);
  if (llt_P_.info() != Eigen::Success) {
    throw std::invalid_argument("DenseQp: P must be positive definite");
  }
  if (m_eq_ > 0) {
    P_inv_At_ = llt_P_.solve(A_.transpose());
    Eigen::MatrixXd S = A_ * P_inv_At_;
    llt_S_.compute(S);
    if (llt_S_.info() != Eigen::Success) {
      throw std::invalid_argument("DenseQp: equality rows are rank deficient");
    }
  }
}

void DenseQp::set_inequalities(Eigen::MatrixXd C, Eigen::VectorXd lb, Eigen::VectorXd ub) {
  if (C.rows() != lb.size() || C.rows() != ub.size() || (C.rows() > 0 && C.cols() != n_)) {
    throw std::invalid_argument("DenseQp: inequality shape mismatch");
  }
  for (int i = 0; i < lb.size(); ++i) {
    if (lb(i) > ub(i)) throw QpInfeasibleError("DenseQp: conflicting bounds");
  }
  C_ = std::move(C);
  lb_ = std::move(lb);
  ub_ = std::move(ub);
  row_response_.clear();
}

Eigen::VectorXd DenseQp::kkt_solve(const Eigen::VectorXd& r, const Eigen::VectorXd& s) const {
  const Eigen::VectorXd y_free = llt_P_.solve(r);
  if (m_eq_ == 0) return y_free;
  const Eigen::VectorXd nu = llt_S_.solve(A_ * y_free - s);
  return y_free - P_inv_At_ * nu;
}

Eigen::VectorXd DenseQp::solve(const Eigen::VectorXd& g, const Eigen::VectorXd& b) const {
  if (g.size() != n_ || b.size() != m_eq_) {
    throw std::invalid_argument("DenseQp::solve: shape mismatch");
  }
  const Eigen::VectorXd y0 = kkt_solve(-g, b);
  const int n_ineq = static_cast<int>(C_.rows());
  if (n_ineq == 0) return y0;

  // Active rows: +1 at upper bound, -1 at lower bound.
  std::vector<std::pair<int, int>> active;
  const int max_iter = 4 * n_ineq + 16;

  Eigen::VectorXd y = y0;
  Eigen::VectorXd mu;
  for (int iter = 0; iter < max_iter; ++iter) {
    const int k = static_cast<int>(active.size());
    if (k > 0) {
      Eigen::MatrixXd Y(n_, k);
      Eigen::VectorXd t(k);
      for (int j = 0; j < k; ++j) {
        const auto [row, side] = active[j];
        auto it = row_response_.find(row);
        if (it == row_response_.end()) {
          it = row_response_
                   .emplace(row, kkt_solve(C_.row(row).transpose(),
                                           Eigen::VectorXd::Zero(m_eq_)))
                   .first;
        }
        Y.col(j) = it->second;
        t(j) = (side > 0) ? ub_(row) : lb_(row);
      }
      Eigen::MatrixXd CW(k, n_);
      for (int j = 0; j < k; ++j) CW.row(j) = C_.row(active[j].first);
      const Eigen::MatrixXd ZW = CW * Y;
      Eigen::LLT<Eigen::MatrixXd> llt_Z(ZW);
      if (llt_Z.info() != Eigen::Success) {
        throw QpInfeasibleError("DenseQp: degenerate active set (conflicting constraints)");
      }
      mu = llt_Z.solve(CW * y0 - t);
      y = y0 - Y * mu;
    } else {
      y = y0;
      mu.resize(0);
    }

    // Most violated inactive row.
    int worst_row = -1, worst_side = 0;
    double worst = kFeasTol;
    for (int i = 0; i < n_ineq; ++i) {
      bool is_active = false;
      for (const auto& [row, side] : active) {
        if (row == i) {
          is_active = true;
          break;
        }
      }
      if (is_active) continue;
      const double val = C_.row(i) * y;
      const double scale = std::max(1.0, std::abs(ub_(i)) + std::abs(lb_(i)));
      if (val - ub_(i) > worst * scale) {
        worst = (val - ub_(i)) / scale;
        worst_row = i;
        worst_side = +1;
      }
      if (lb_(i) - val > worst * scale) {
        worst = (lb_(i) - val) / scale;
        worst_row = i;
        worst_side = -1;
      }
    }
    if (worst_row >= 0) {
      active.emplace_back(worst_row, worst_side);
      continue;
    }

    // Dual feasibility: drop the worst wrong-signed multiplier.
    int drop = -1;
    double worst_mu = kDualTol;
    for (int j = 0; j < static_cast<int>(active.size()); ++j) {
      const double signed_mu = active[j].second > 0 ? mu(j) : -mu(j);
      if (signed_mu < -worst_mu) {
        worst_mu = -signed_mu;
        drop = j;
      }
    }
    if (drop >= 0) {
      active.erase(active.begin() + drop);
      continue;
    }
    return y;
  }
  throw QpInfeasibleError("DenseQp: active-set iteration limit (infeasible?)");
}

}  // namespace scimpc
