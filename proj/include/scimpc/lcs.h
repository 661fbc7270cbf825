#pragma once

#include <string>
#include <utility>

#include <Eigen/Dense>

namespace scimpc {

struct LcsDims {
  int n_x = 0;
  int n_u = 0;
  int n_lambda = 0;
};

// Piecewise-linear dynamics at a fixed time step:
//   x_next = A x + B u + D lambda + d
//   0 <= lambda  complementary to  E x + F lambda + H u + c >= 0
struct Lcs {
  Eigen::MatrixXd A, B, D;
  Eigen::VectorXd d;
  Eigen::MatrixXd E, F, H;
  Eigen::VectorXd c;
  double dt = 0.0;

  LcsDims dims() const {
    return {static_cast<int>(A.rows()), static_cast<int>(B.cols()),
            static_cast<int>(F.rows())};
  }

  // Throws std::invalid_argument on inconsistent shapes, non-finite entries,
  // or dt <= 0.
  void validate() const;

  std::string to_json() const;
  static Lcs from_json(const std::string& text);
};

// One propagation step: lambda from the embedded LCP at (x, u), then the
// affine state update. Deterministic; forwards LCP failures.
std::pair<Eigen::VectorXd, Eigen::VectorXd> lcs_step(const Lcs& lcs,
                                                     const Eigen::VectorXd& x,
                                                     const Eigen::VectorXd& u);

}  // namespace scimpc
