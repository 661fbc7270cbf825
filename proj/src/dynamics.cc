#include "scimpc/dynamics.h"

#include <cmath>

#include "scimpc/lcp.h"

namespace scimpc {

namespace {

struct StepWorkspace {
  Eigen::LLT<Eigen::MatrixXd> mass_llt;
  Eigen::VectorXd q, v;
};

Eigen::LLT<Eigen::MatrixXd> factor_mass(const Plant& plant, const Eigen::VectorXd& q) {
  Eigen::LLT<Eigen::MatrixXd> llt(plant.mass_matrix(q));
  if (llt.info() != Eigen::Success) {
    throw SingularMassMatrixError("mass matrix not positive definite");
  }
  return llt;
}

// Velocity after the free (contact-impulse supplied) update.
Eigen::VectorXd velocity_update(const Plant& plant, const Eigen::VectorXd& q,
                                const Eigen::VectorXd& v, const Eigen::VectorXd& u,
                                const Eigen::VectorXd& lambda,
                                const ContactBlocks& blocks, double dt,
                                const Eigen::LLT<Eigen::MatrixXd>& mass_llt) {
  Eigen::VectorXd impulse = dt * plant.generalized_force(q, v, u);
  if (lambda.size() > 0) {
    impulse += blocks.impulse_map.transpose() * lambda;
  }
  return v + mass_llt.solve(impulse);
}

// Full one-step state map with the contact impulse treated as a known input.
Eigen::VectorXd state_map(const Plant& plant, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& u, const Eigen::VectorXd& lambda,
                          double dt) {
  Eigen::VectorXd q, v;
  plant.split_state(x, &q, &v);
  const auto mass_llt = factor_mass(plant, q);
  const ContactBlocks blocks = plant.contact_blocks(q, dt);
  const Eigen::VectorXd v_next =
      velocity_update(plant, q, v, u, lambda, blocks, dt, mass_llt);
  Eigen::VectorXd x_next(plant.n_x());
  x_next.head(plant.n_q()) = plant.integrate_positions(q, v_next, dt);
  x_next.tail(plant.n_v()) = v_next;
  return x_next;
}

// Per-row complementarity function with the impulse treated as a known input.
Eigen::VectorXd constraint_map(const Plant& plant, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& u, const Eigen::VectorXd& lambda,
                               double dt) {
  Eigen::VectorXd q, v;
  plant.split_state(x, &q, &v);
  const auto mass_llt = factor_mass(plant, q);
  const ContactBlocks blocks = plant.contact_blocks(q, dt);
  const Eigen::VectorXd v_next =
      velocity_update(plant, q, v, u, lambda, blocks, dt, mass_llt);
  return blocks.velocity_map * v_next + blocks.coupling * lambda + blocks.offset;
}

}  // namespace

std::pair<Eigen::VectorXd, Eigen::VectorXd> sim_step_with_impulses(
    const Plant& plant, const Eigen::VectorXd& x, const Eigen::VectorXd& u, double dt) {
  if (x.size() != plant.n_x() || u.size() != plant.n_u()) {
    throw DimensionError("sim_step: dimension mismatch");
  }
  if (dt <= 0.0) throw std::invalid_argument("sim_step: dt must be positive");

  Eigen::VectorXd q, v;
  plant.split_state(x, &q, &v);
  q = plant.normalize_configuration(q);
  const auto mass_llt = factor_mass(plant, q);
  const ContactBlocks blocks = plant.contact_blocks(q, dt);

  const Eigen::VectorXd v_free =
      v + dt * mass_llt.solve(plant.generalized_force(q, v, u));

  Eigen::VectorXd lambda(0);
  if (blocks.total_rows > 0) {
    const Eigen::MatrixXd M_lcp =
        blocks.velocity_map * mass_llt.solve(blocks.impulse_map.transpose()) +
        blocks.coupling;
    const Eigen::VectorXd w_lcp = blocks.velocity_map * v_free + blocks.offset;
    try {
      lambda = lcp_solve(M_lcp, w_lcp);
    } catch (const LcpRayTerminationError& err) {
      throw SimStepError(std::string("sim_step: contact LCP failed: ") + err.what(), x);
    }
  }

  Eigen::VectorXd v_next = v_free;
  if (lambda.size() > 0) {
    v_next += mass_llt.solve(blocks.impulse_map.transpose() * lambda);
  }
  Eigen::VectorXd x_next(plant.n_x());
  x_next.head(plant.n_q()) = plant.integrate_positions(q, v_next, dt);
  x_next.tail(plant.n_v()) = v_next;
  return {x_next, lambda};
}

Eigen::VectorXd sim_step(const Plant& plant, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u, double dt) {
  return sim_step_with_impulses(plant, x, u, dt).first;
}

Lcs linearize(const Plant& plant, const Eigen::VectorXd& x_nom,
              const Eigen::VectorXd& u_nom, double dt) {
  if (x_nom.size() != plant.n_x() || u_nom.size() != plant.n_u()) {
    throw DimensionError("linearize: dimension mismatch");
  }
  if (dt <= 0.0) throw std::invalid_argument("linearize: dt must be positive");

  const int n_x = plant.n_x();
  const int n_u = plant.n_u();
  const int n_l = plant.n_lambda();

  Eigen::VectorXd q_nom, v_nom;
  plant.split_state(x_nom, &q_nom, &v_nom);
  q_nom = plant.normalize_configuration(q_nom);
  Eigen::VectorXd x0(n_x);
  x0 << q_nom, v_nom;

  // Nominal impulse from the plant's own one-step LCP.
  Eigen::VectorXd lambda_nom(n_l);
  if (n_l > 0) {
    lambda_nom = sim_step_with_impulses(plant, x0, u_nom, dt).second;
  }

  Lcs lcs;
  lcs.dt = dt;
  lcs.A.resize(n_x, n_x);
  lcs.B.resize(n_x, n_u);
  lcs.D.resize(n_x, n_l);
  lcs.E.resize(n_l, n_x);
  lcs.H.resize(n_l, n_u);

  const Eigen::VectorXd g0 = state_map(plant, x0, u_nom, lambda_nom, dt);
  Eigen::VectorXd psi0(0);
  if (n_l > 0) psi0 = constraint_map(plant, x0, u_nom, lambda_nom, dt);

  const double fd = 1e-6;
  for (int i = 0; i < n_x; ++i) {
    const double h = fd * std::max(1.0, std::abs(x0(i)));
    Eigen::VectorXd hi = x0, lo = x0;
    hi(i) += h;
    lo(i) -= h;
    lcs.A.col(i) = (state_map(plant, hi, u_nom, lambda_nom, dt) -
                    state_map(plant, lo, u_nom, lambda_nom, dt)) /
                   (2.0 * h);
    if (n_l > 0) {
      lcs.E.col(i) = (constraint_map(plant, hi, u_nom, lambda_nom, dt) -
                      constraint_map(plant, lo, u_nom, lambda_nom, dt)) /
                     (2.0 * h);
    }
  }
  for (int i = 0; i < n_u; ++i) {
    const double h = fd * std::max(1.0, std::abs(u_nom(i)));
    Eigen::VectorXd hi = u_nom, lo = u_nom;
    hi(i) += h;
    lo(i) -= h;
    lcs.B.col(i) =
        (state_map(plant, x0, hi, lambda_nom, dt) - state_map(plant, x0, lo, lambda_nom, dt)) /
        (2.0 * h);
    if (n_l > 0) {
      lcs.H.col(i) = (constraint_map(plant, x0, hi, lambda_nom, dt) -
                      constraint_map(plant, x0, lo, lambda_nom, dt)) /
                     (2.0 * h);
    }
  }
  for (int i = 0; i < n_l; ++i) {
    const double h = fd * std::max(1.0, std::abs(lambda_nom(i)));
    Eigen::VectorXd hi = lambda_nom, lo = lambda_nom;
    hi(i) += h;
    lo(i) -= h;
    lcs.D.col(i) =
        (state_map(plant, x0, u_nom, hi, dt) - state_map(plant, x0, u_nom, lo, dt)) /
        (2.0 * h);
  }

  // F is exactly the assembled LCP matrix at the nominal configuration.
  {
    const auto mass_llt = factor_mass(plant, q_nom);
    const ContactBlocks blocks = plant.contact_blocks(q_nom, dt);
    if (n_l > 0) {
      lcs.F = blocks.velocity_map * mass_llt.solve(blocks.impulse_map.transpose()) +
              blocks.coupling;
    } else {
      lcs.F.resize(0, 0);
    }
  }

  lcs.d = g0 - lcs.A * x0 - lcs.B * u_nom;
  if (n_l > 0) {
    lcs.d -= lcs.D * lambda_nom;
    lcs.c = psi0 - lcs.E * x0 - lcs.F * lambda_nom - lcs.H * u_nom;
  } else {
    lcs.c.resize(0);
  }
  lcs.validate();
  return lcs;
}

}  // namespace scimpc
