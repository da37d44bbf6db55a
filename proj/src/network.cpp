#include "opfgrad/network.hpp"

#include "opfgrad/errors.hpp"

#include <numeric>
#include <string>

namespace opfgrad {

namespace {

int find_root(std::vector<int>& parent, int v) {
  while (parent[v] != v) {
    parent[v] = parent[parent[v]];
    v = parent[v];
  }
  return v;
}

}  // namespace

bool is_connected(int n_bus, const std::vector<Edge>& edges) {
  if (n_bus <= 0) return false;
  std::vector<int> parent(n_bus);
  std::iota(parent.begin(), parent.end(), 0);
  int components = n_bus;
  for (const auto& e : edges) {
    if (e.from < 1 || e.from > n_bus || e.to < 1 || e.to > n_bus) continue;
    int a = find_root(parent, e.from - 1);
    int b = find_root(parent, e.to - 1);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

PowerNetwork::PowerNetwork(int n_gen, int n_load, std::vector<Edge> edges)
    : n_gen_(n_gen), n_load_(n_load), edges_(std::move(edges)) {
  if (n_gen_ < 1) throw InvalidInput("network needs at least one generator");
  if (n_load_ < 1) throw InvalidInput("network needs at least one load");
  const int n = n_bus();
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const auto& e = edges_[k];
    const std::string tag = "edge " + std::to_string(k + 1);
    if (e.from < 1 || e.from > n || e.to < 1 || e.to > n)
      throw InvalidInput(tag + ": endpoint outside 1.." + std::to_string(n));
    if (e.from == e.to) throw InvalidInput(tag + ": self-loop");
    if (!(e.susceptance > 0.0))
      throw InvalidInput(tag + ": susceptance must be positive");
  }
  if (!is_connected(n, edges_)) throw InvalidInput("network is disconnected");
}

Eigen::VectorXd PowerNetwork::susceptances() const {
  Eigen::VectorXd b(n_edge());
  for (int k = 0; k < n_edge(); ++k) b[k] = edges_[k].susceptance;
  return b;
}

PowerNetwork PowerNetwork::scaled(double alpha) const {
  if (!(alpha > 0.0)) throw InvalidInput("scale factor must be positive");
  auto edges = edges_;
  for (auto& e : edges) e.susceptance *= alpha;
  return PowerNetwork(n_gen_, n_load_, std::move(edges));
}

Eigen::MatrixXd incidence_matrix(const PowerNetwork& net) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(net.n_bus(), net.n_edge());
  for (int k = 0; k < net.n_edge(); ++k) {
    c(net.edges()[k].from - 1, k) = 1.0;
    c(net.edges()[k].to - 1, k) = -1.0;
  }
  return c;
}

Eigen::MatrixXd laplacian(const PowerNetwork& net) {
  const Eigen::MatrixXd c = incidence_matrix(net);
  return c * net.susceptances().asDiagonal() * c.transpose();
}

Eigen::MatrixXd flow_matrix(const PowerNetwork& net) {
  return net.susceptances().asDiagonal() * incidence_matrix(net).transpose();
}

}  // namespace opfgrad
