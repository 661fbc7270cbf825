#include "scimpc/lcp.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace scimpc {

LcpResiduals lcp_residuals(const Eigen::MatrixXd& M, const Eigen::VectorXd& w,
                           const Eigen::VectorXd& z) {
  LcpResiduals r;
  if (z.size() == 0) return r;
  const Eigen::VectorXd slack = M * z + w;
  r.z_neg = std::max(0.0, -z.minCoeff());
  r.slack_neg = std::max(0.0, -slack.minCoeff());
  r.comp = std::abs(z.dot(slack));
  return r;
}

namespace {

// Lexicographic comparison of (rhs_i, B^-1 row i) / d_i against the current
// best candidate row. Returns true if row `i` is strictly smaller.
bool lex_less(const Eigen::MatrixXd& tableau, const Eigen::VectorXd& rhs, int m,
              int i, double di, int j, double dj) {
  const double primary_i = rhs(i) / di;
  const double primary_j = rhs(j) / dj;
  if (primary_i != primary_j) return primary_i < primary_j;
  for (int c = 0; c < m; ++c) {
    const double a = tableau(i, c) / di;
    const double b = tableau(j, c) / dj;
    if (a != b) return a < b;
  }
  return false;
}

}  // namespace

Eigen::VectorXd lcp_solve(const Eigen::MatrixXd& M, const Eigen::VectorXd& w) {
  const int m = static_cast<int>(w.size());
  if (M.rows() != m || M.cols() != m) {
    throw std::invalid_argument("lcp_solve: M must be square and match w");
  }
  if (m == 0) return Eigen::VectorXd();
  if (!M.allFinite() || !w.allFinite()) {
    throw std::invalid_argument("lcp_solve: non-finite input");
  }
  if (w.minCoeff() >= 0.0) {
    return Eigen::VectorXd::Zero(m);
  }

  // Dictionary: w_vars - M z_vars - e z0 = q, all variables >= 0.
  // Columns: [0, m) w vars (initially I, doubles as B^-1 for the lex rule),
  // [m, 2m) z vars, column 2m the artificial z0.
  const int z0_col = 2 * m;
  Eigen::MatrixXd tableau(m, 2 * m + 1);
  tableau.leftCols(m).setIdentity();
  tableau.middleCols(m, m) = -M;
  tableau.col(z0_col).setConstant(-1.0);
  Eigen::VectorXd rhs = w;

  std::vector<int> basic(m);
  for (int i = 0; i < m; ++i) basic[i] = i;

  const double piv_tol =
      16.0 * std::numeric_limits<double>::epsilon() * m *
      std::max(1.0, M.lpNorm<Eigen::Infinity>());

  auto pivot = [&](int row, int col) {
    const double p = tableau(row, col);
    tableau.row(row) /= p;
    rhs(row) /= p;
    for (int i = 0; i < m; ++i) {
      if (i == row) continue;
      const double f = tableau(i, col);
      if (f == 0.0) continue;
      tableau.row(i) -= f * tableau.row(row);
      rhs(i) -= f * rhs(row);
    }
  };

  auto extract = [&]() {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < m; ++i) {
      if (basic[i] >= m && basic[i] < 2 * m) {
        z(basic[i] - m) = std::max(0.0, rhs(i));
      }
    }
    return z;
  };

  // Initial pivot: z0 enters; the w with the lexicographically smallest
  // (most negative) value leaves.
  int leave_row = 0;
  for (int i = 1; i < m; ++i) {
    if (lex_less(tableau, rhs, m, i, 1.0, leave_row, 1.0)) leave_row = i;
  }
  int leaving = basic[leave_row];
  pivot(leave_row, z0_col);
  basic[leave_row] = z0_col;
  int driving = m + leaving;  // complement of the departed w variable

  const int max_pivots = 50 * m + 100;
  for (int it = 0; it < max_pivots; ++it) {
    // Ratio test on the driving column, lexicographic tie-breaking, with
    // preference for letting z0 leave when it is among the minimum ratios.
    int best = -1;
    for (int i = 0; i < m; ++i) {
      const double di = tableau(i, driving);
      if (di <= piv_tol) continue;
      if (best < 0 || lex_less(tableau, rhs, m, i, di, best, tableau(best, driving))) {
        best = i;
      }
    }
    if (best < 0) {
      Eigen::VectorXd z = extract();
      throw LcpRayTerminationError("lcp_solve: secondary ray termination", z,
                                   lcp_residuals(M, w, z));
    }
    if (basic[best] != z0_col) {
      // If z0's row ties the minimum ratio, drive z0 out instead.
      for (int i = 0; i < m; ++i) {
        if (basic[i] != z0_col) continue;
        const double di = tableau(i, driving);
        if (di > piv_tol) {
          const double ratio_z0 = rhs(i) / di;
          const double ratio_best = rhs(best) / tableau(best, driving);
          if (ratio_z0 <= ratio_best + piv_tol * std::max(1.0, std::abs(ratio_best))) {
            best = i;
          }
        }
        break;
      }
    }
    leaving = basic[best];
    pivot(best, driving);
    basic[best] = driving;
    if (leaving == z0_col) {
      return extract();
    }
    driving = (leaving < m) ? leaving + m : leaving - m;
  }

  Eigen::VectorXd z = extract();
  throw LcpRayTerminationError("lcp_solve: pivot limit exceeded", z,
                               lcp_residuals(M, w, z));
}

}  // namespace scimpc
