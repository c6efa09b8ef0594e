#pragma once

#include <Eigen/Dense>

namespace ptc {

// Follower graph plus leader pinning. Followers are numbered 1..N.
struct GraphTopology {
  int n_agents = 0;
  Eigen::MatrixXi adjacency;
  Eigen::VectorXi pinning;
  Eigen::MatrixXd laplacian;      // L_G = deg - A
  Eigen::MatrixXd laplacian_bar;  // L_G + diag(pinning)
  double lambda_min_bar = 0.0;
};

inline constexpr double kConnectivityTolerance = 1e-10;

// Throws DimensionMismatch, NotSymmetric, InvalidArgument, NotPinned, Disconnected.
GraphTopology build_topology(const Eigen::MatrixXi& adjacency, const Eigen::VectorXi& pinning);

// Row k (1-based) of the pinned Laplacian.
Eigen::RowVectorXd row_of_lbar(const GraphTopology& topology, int k);

Eigen::MatrixXi path_adjacency(int n_agents);
Eigen::MatrixXi complete_adjacency(int n_agents);

}  // namespace ptc
