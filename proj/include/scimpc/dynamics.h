#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "scimpc/lcs.h"
#include "scimpc/plant.h"

namespace scimpc {

class SingularMassMatrixError : public std::runtime_error {
 public:
  explicit SingularMassMatrixError(const std::string& what)
      : std::runtime_error(what) {}
};

// LCP failure during a simulation step, carrying the state it happened at.
class SimStepError : public std::runtime_error {
 public:
  SimStepError(const std::string& what, Eigen::VectorXd state)
      : std::runtime_error(what), state(std::move(state)) {}
  Eigen::VectorXd state;
};

// One semi-implicit time step of the nonlinear plant: recompute witness
// pairs, solve the contact LCP for impulses, integrate velocities then
// positions (quaternions renormalized).
std::pair<Eigen::VectorXd, Eigen::VectorXd> sim_step_with_impulses(
    const Plant& plant, const Eigen::VectorXd& x, const Eigen::VectorXd& u, double dt);

Eigen::VectorXd sim_step(const Plant& plant, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u, double dt);

// Semi-implicit time-stepping LCS of the plant about (x_nom, u_nom), with the
// nominal impulse taken from the plant's own one-step LCP. State and
// constraint Jacobians are computed by central differences through the full
// one-step map, so the LCS reproduces the nonlinear step to first order
// within a contact mode.
Lcs linearize(const Plant& plant, const Eigen::VectorXd& x_nom,
              const Eigen::VectorXd& u_nom, double dt);

}  // namespace scimpc
