#pragma once

// Random graphs and gain pairs for property tests. Every setup returned by random_setup
// has a connected pinned graph and Hurwitz controller and observer matrices.

#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ptc/errors.hpp"
#include "ptc/gain_synthesis.hpp"
#include "ptc/graph_topology.hpp"
#include "support/test_support.hpp"

namespace ptc::test {

struct RandomGraph {
  Eigen::MatrixXi adjacency;
  Eigen::VectorXi pinning;
};

// Random spanning tree plus extra edges; at least one pinned follower.
inline RandomGraph random_connected_graph(std::mt19937_64& rng, int n_agents) {
  RandomGraph g;
  g.adjacency = Eigen::MatrixXi::Zero(n_agents, n_agents);
  for (int k = 1; k < n_agents; ++k) {
    const int parent = std::uniform_int_distribution<int>(0, k - 1)(rng);
    g.adjacency(k, parent) = g.adjacency(parent, k) = 1;
  }
  std::bernoulli_distribution extra(0.3);
  for (int i = 0; i < n_agents; ++i)
    for (int j = i + 1; j < n_agents; ++j)
      if (extra(rng)) g.adjacency(i, j) = g.adjacency(j, i) = 1;
  g.pinning = Eigen::VectorXi::Zero(n_agents);
  g.pinning(std::uniform_int_distribution<int>(0, n_agents - 1)(rng)) = 1;
  std::bernoulli_distribution pin(0.3);
  for (int k = 0; k < n_agents; ++k)
    if (pin(rng)) g.pinning(k) = 1;
  return g;
}

// Coefficients of prod (s + p_i), highest power dropped, reversed so that the last entry
// multiplies s^{n-1}: the chain gain whose companion form has these poles.
inline Eigen::RowVectorXd chain_gain_from_poles(const std::vector<double>& poles) {
  std::vector<double> poly{1.0};
  for (double p : poles) {
    std::vector<double> next(poly.size() + 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i] += p * poly[i];
      next[i + 1] += poly[i];
    }
    poly = next;
  }
  const auto n = static_cast<Eigen::Index>(poles.size());
  Eigen::RowVectorXd gain(n);
  for (Eigen::Index i = 0; i < n; ++i) gain(i) = poly[static_cast<std::size_t>(i)];
  return gain;
}

// Observer gain G with A - G^T C Hurwitz: G_i is the coefficient of s^{n-i}.
inline Eigen::RowVectorXd observer_gain_from_poles(const std::vector<double>& poles) {
  const Eigen::RowVectorXd coeffs = chain_gain_from_poles(poles);
  return coeffs.reverse();
}

struct RandomSetup {
  GraphTopology topology;
  SystemMatrices system;
  std::vector<double> sensor_bounds;  // per follower
};

// N in [1, max_followers], n in [1, max_order]; rejection-samples until both loops are Hurwitz.
inline RandomSetup random_setup(std::mt19937_64& rng, int max_followers = 4, int max_order = 3) {
  for (;;) {
    const int followers = std::uniform_int_distribution<int>(1, max_followers)(rng);
    const int order = std::uniform_int_distribution<int>(1, max_order)(rng);
    const RandomGraph g = random_connected_graph(rng, followers);
    std::vector<double> k_poles, g_poles;
    for (int i = 0; i < order; ++i) {
      k_poles.push_back(uniform(rng, 0.5, 3.0));
      g_poles.push_back(uniform(rng, 0.5, 3.0));
    }
    std::vector<Eigen::VectorXd> rho(static_cast<std::size_t>(followers), Eigen::VectorXd(order));
    for (auto& r : rho)
      for (Eigen::Index i = 0; i < order; ++i) r(i) = uniform(rng, 0.0, 0.5);
    try {
      RandomSetup s;
      s.topology = build_topology(g.adjacency, g.pinning);
      s.system = build_system_matrices(order, s.topology, chain_gain_from_poles(k_poles),
                                       observer_gain_from_poles(g_poles), rho);
      return s;
    } catch (const Error&) {
      continue;
    }
  }
}

}  // namespace ptc::test
