#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace opfgrad {

/// One branch of the network. Buses are 1-based; positive flow runs from -> to.
struct Edge {
  int from = 0;
  int to = 0;
  double susceptance = 0.0;
};

/// Lossless DC network with generators on buses 1..n_gen and loads on
/// n_gen+1..n_gen+n_load.
///
/// The constructor validates connectivity, positive susceptances, endpoint
/// ranges and the absence of self-loops, so every live instance is usable by
/// the rest of the library without further checks.
class PowerNetwork {
 public:
  PowerNetwork(int n_gen, int n_load, std::vector<Edge> edges);

  int n_gen() const { return n_gen_; }
  int n_load() const { return n_load_; }
  int n_bus() const { return n_gen_ + n_load_; }
  int n_edge() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }

  Eigen::VectorXd susceptances() const;

  /// Copy with every susceptance multiplied by `alpha` (> 0).
  PowerNetwork scaled(double alpha) const;

 private:
  int n_gen_;
  int n_load_;
  std::vector<Edge> edges_;
};

/// N x E signed incidence matrix: +1 at the from bus, -1 at the to bus.
Eigen::MatrixXd incidence_matrix(const PowerNetwork& net);

/// Weighted Laplacian C diag(b) C^T.
Eigen::MatrixXd laplacian(const PowerNetwork& net);

/// Branch-flow operator B C^T (E x N), so that p = B C^T theta.
Eigen::MatrixXd flow_matrix(const PowerNetwork& net);

/// True when the undirected graph on `n_bus` vertices is connected.
bool is_connected(int n_bus, const std::vector<Edge>& edges);

}  // namespace opfgrad
