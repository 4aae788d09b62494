#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace netfm {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Directed network on n nodes, dense adjacency with zero diagonal.
class Network {
 public:
  Network() = default;
  explicit Network(int n) : n_(n), adj_(std::vector<std::uint8_t>(static_cast<std::size_t>(n) * n, 0)) {}

  int n() const { return n_; }
  bool edge(int i, int j) const { return adj_[idx(i, j)] != 0; }
  void set_edge(int i, int j, bool present);

  std::optional<std::vector<std::string>> node_labels;

 private:
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n_ + j; }
  int n_ = 0;
  std::vector<std::uint8_t> adj_;
};

/// Dyadic covariates: X per ordered pair, Z per unordered pair (stored once).
class Covariates {
 public:
  Covariates() = default;
  Covariates(int n, int dim_x, int dim_z);

  int n() const { return n_; }
  int dim_x() const { return dim_x_; }
  int dim_z() const { return dim_z_; }

  // X_ij, ordered pair i != j.
  Eigen::Ref<const VectorXd> x(int i, int j) const { return X_.row(ord(i, j)).transpose(); }
  void set_x(int i, int j, const VectorXd& v) { X_.row(ord(i, j)) = v.transpose(); }

  // Z_{ij} = Z_{ji}, stored per unordered pair.
  Eigen::Ref<const VectorXd> z(int i, int j) const { return Z_.row(unord(i, j)).transpose(); }
  void set_z(int i, int j, const VectorXd& v) { Z_.row(unord(i, j)) = v.transpose(); }

  std::optional<std::vector<std::string>> x_names;
  std::optional<std::vector<std::string>> z_names;

 private:
  int ord(int i, int j) const { return i * n_ + j; }
  int unord(int i, int j) const {
    if (i > j) std::swap(i, j);
    return i * n_ + j;
  }
  int n_ = 0, dim_x_ = 0, dim_z_ = 0;
  MatrixXd X_;  // (n*n) x dim_x, rows for ordered pairs
  MatrixXd Z_;  // (n*n) x dim_z, rows for unordered pairs i<j
};

struct DegreeSequences {
  std::vector<int> d;  // out-degrees
  std::vector<int> b;  // in-degrees
};

enum class BoundaryReason { ZeroOut, ZeroIn, FullOut, FullIn };

std::string to_string(BoundaryReason r);

struct TrimRound {
  std::vector<std::pair<int, BoundaryReason>> removed;  // original node ids
};

struct TrimTrace {
  std::vector<TrimRound> rounds;
  std::vector<int> surviving;  // original node ids, sorted
};

struct NetworkStats {
  double density = 0.0;
  double reciprocity_share = 0.0;
  std::optional<double> transitivity;  // absent when no open triplets
};

Network build_network(int n, const std::vector<std::pair<int, int>>& edges);

DegreeSequences degrees(const Network& net);

// Nodes with out- or in-degree on the boundary {0, n-1}, all applicable reasons.
std::vector<std::pair<int, BoundaryReason>> boundary_nodes(const Network& net);

// Removes all boundary nodes round by round until none remain (or empty).
std::pair<Network, TrimTrace> trim_iteratively(const Network& net);

// Restriction of net (and optionally covariates) to a sorted node subset.
Network subnetwork(const Network& net, const std::vector<int>& nodes);
Covariates subcovariates(const Covariates& cov, const std::vector<int>& nodes);

NetworkStats network_stats(const Network& net);

}  // namespace netfm
