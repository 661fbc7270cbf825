#include "scimpc/lcs.h"

#include <stdexcept>

#include <nlohmann/json.hpp>

#include "scimpc/lcp.h"

namespace scimpc {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  if (static_cast<int>(j.size()) != rows) {
    throw std::invalid_argument("lcs json: wrong row count");
  }
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(j[i].size()) != cols) {
      throw std::invalid_argument("lcs json: wrong column count");
    }
    for (int c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Eigen::VectorXd vector_from_json(const json& j, int n) {
  Eigen::VectorXd v(n);
  if (static_cast<int>(j.size()) != n) {
    throw std::invalid_argument("lcs json: wrong vector length");
  }
  for (int i = 0; i < n; ++i) v(i) = j[i].get<double>();
  return v;
}

}  // namespace

void Lcs::validate() const {
  const auto [n_x, n_u, n_l] = dims();
  auto check = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("Lcs::validate: ") + what);
  };
  check(dt > 0.0, "dt must be positive");
  check(A.rows() == n_x && A.cols() == n_x, "A shape");
  check(B.rows() == n_x && B.cols() == n_u, "B shape");
  check(D.rows() == n_x && D.cols() == n_l, "D shape");
  check(d.size() == n_x, "d shape");
  check(E.rows() == n_l && E.cols() == n_x, "E shape");
  check(F.rows() == n_l && F.cols() == n_l, "F shape");
  check(H.rows() == n_l && H.cols() == n_u, "H shape");
  check(c.size() == n_l, "c shape");
  check(A.allFinite() && B.allFinite() && D.allFinite() && d.allFinite() &&
            E.allFinite() && F.allFinite() && H.allFinite() && c.allFinite(),
        "non-finite entries");
}

std::string Lcs::to_json() const {
  const auto [n_x, n_u, n_l] = dims();
  json j;
  j["dims"] = {{"n_x", n_x}, {"n_u", n_u}, {"n_lambda", n_l}};
  j["dt"] = dt;
  j["A"] = matrix_to_json(A);
  j["B"] = matrix_to_json(B);
  j["D"] = matrix_to_json(D);
  j["d"] = vector_to_json(d);
  j["E"] = matrix_to_json(E);
  j["F"] = matrix_to_json(F);
  j["H"] = matrix_to_json(H);
  j["c"] = vector_to_json(c);
  return j.dump(2);
}

Lcs Lcs::from_json(const std::string& text) {
  const json j = json::parse(text);
  const int n_x = j.at("dims").at("n_x").get<int>();
  const int n_u = j.at("dims").at("n_u").get<int>();
  const int n_l = j.at("dims").at("n_lambda").get<int>();
  Lcs lcs;
  lcs.dt = j.at("dt").get<double>();
  lcs.A = matrix_from_json(j.at("A"), n_x, n_x);
  lcs.B = matrix_from_json(j.at("B"), n_x, n_u);
  lcs.D = matrix_from_json(j.at("D"), n_x, n_l);
  lcs.d = vector_from_json(j.at("d"), n_x);
  lcs.E = matrix_from_json(j.at("E"), n_l, n_x);
  lcs.F = matrix_from_json(j.at("F"), n_l, n_l);
  lcs.H = matrix_from_json(j.at("H"), n_l, n_u);
  lcs.c = vector_from_json(j.at("c"), n_l);
  lcs.validate();
  return lcs;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> lcs_step(const Lcs& lcs,
                                                     const Eigen::VectorXd& x,
                                                     const Eigen::VectorXd& u) {
  const auto [n_x, n_u, n_l] = lcs.dims();
  if (x.size() != n_x || u.size() != n_u) {
    throw std::invalid_argument("lcs_step: dimension mismatch");
  }
  Eigen::VectorXd lambda(0);
  if (n_l > 0) {
    lambda = lcp_solve(lcs.F, lcs.E * x + lcs.H * u + lcs.c);
  }
  Eigen::VectorXd x_next = lcs.A * x + lcs.B * u + lcs.d;
  if (n_l > 0) x_next += lcs.D * lambda;
  return {x_next, lambda};
}

}  // namespace scimpc
