#include "ptc/graph_topology.hpp"

#include <string>

#include "ptc/errors.hpp"

namespace ptc {

GraphTopology build_topology(const Eigen::MatrixXi& adjacency, const Eigen::VectorXi& pinning) {
  const auto n = adjacency.rows();
  if (n == 0 || adjacency.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "adjacency must be a non-empty square matrix");
  }
  if (pinning.size() != n) {
    throw Error(ErrorCode::DimensionMismatch,
                "pinning has " + std::to_string(pinning.size()) + " entries, expected " + std::to_string(n));
  }
  if (adjacency != adjacency.transpose()) {
    throw Error(ErrorCode::NotSymmetric, "adjacency must be symmetric (undirected graph)");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (adjacency(i, i) != 0) throw Error(ErrorCode::InvalidArgument, "adjacency diagonal must be zero");
    if (pinning(i) != 0 && pinning(i) != 1) throw Error(ErrorCode::InvalidArgument, "pinning entries must be 0 or 1");
    for (Eigen::Index j = 0; j < n; ++j) {
      if (adjacency(i, j) != 0 && adjacency(i, j) != 1) {
        throw Error(ErrorCode::InvalidArgument, "adjacency entries must be 0 or 1");
      }
    }
  }
  if (pinning.sum() == 0) throw Error(ErrorCode::NotPinned, "no follower observes the leader");

  // Integer Laplacian first so that rows sum to exactly zero.
  Eigen::MatrixXi lap = -adjacency;
  lap.diagonal() = adjacency.rowwise().sum();

  GraphTopology topo;
  topo.n_agents = static_cast<int>(n);
  topo.adjacency = adjacency;
  topo.pinning = pinning;
  topo.laplacian = lap.cast<double>();
  Eigen::MatrixXi lap_bar = lap;
  lap_bar.diagonal() += pinning;
  topo.laplacian_bar = lap_bar.cast<double>();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(topo.laplacian_bar, Eigen::EigenvaluesOnly);
  topo.lambda_min_bar = eig.eigenvalues()(0);
  if (topo.lambda_min_bar <= kConnectivityTolerance) {
    throw Error(ErrorCode::Disconnected,
                "some follower component has no path to the leader (lambda_min = " +
                    std::to_string(topo.lambda_min_bar) + ")");
  }
  return topo;
}

Eigen::RowVectorXd row_of_lbar(const GraphTopology& topology, int k) {
  if (k < 1 || k > topology.n_agents) {
    throw Error(ErrorCode::IndexOutOfRange, "follower index " + std::to_string(k) + " out of range");
  }
  return topology.laplacian_bar.row(k - 1);
}

Eigen::MatrixXi path_adjacency(int n_agents) {
  Eigen::MatrixXi a = Eigen::MatrixXi::Zero(n_agents, n_agents);
  for (int i = 0; i + 1 < n_agents; ++i) a(i, i + 1) = a(i + 1, i) = 1;
  return a;
}

Eigen::MatrixXi complete_adjacency(int n_agents) {
  Eigen::MatrixXi a = Eigen::MatrixXi::Ones(n_agents, n_agents);
  a.diagonal().setZero();
  return a;
}

}  // namespace ptc
