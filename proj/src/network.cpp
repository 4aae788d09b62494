#include "netfm/network.hpp"

#include <algorithm>
#include <stdexcept>

namespace netfm {

void Network::set_edge(int i, int j, bool present) {
  if (i < 0 || j < 0 || i >= n_ || j >= n_) throw std::out_of_range("Network::set_edge: node id out of range");
  if (i == j && present) throw std::invalid_argument("Network::set_edge: self-loops are not allowed");
  adj_[idx(i, j)] = present ? 1 : 0;
}

Covariates::Covariates(int n, int dim_x, int dim_z) : n_(n), dim_x_(dim_x), dim_z_(dim_z) {
  X_ = MatrixXd::Zero(static_cast<Eigen::Index>(n) * n, dim_x);
  Z_ = MatrixXd::Zero(static_cast<Eigen::Index>(n) * n, dim_z);
}

std::string to_string(BoundaryReason r) {
  switch (r) {
    case BoundaryReason::ZeroOut: return "zero-out";
    case BoundaryReason::ZeroIn: return "zero-in";
    case BoundaryReason::FullOut: return "full-out";
    case BoundaryReason::FullIn: return "full-in";
  }
  return "?";
}

Network build_network(int n, const std::vector<std::pair<int, int>>& edges) {
  if (n < 0) throw std::invalid_argument("build_network: negative node count");
  Network net(n);
  for (const auto& [src, dst] : edges) {
    if (src < 0 || src >= n || dst < 0 || dst >= n)
      throw std::invalid_argument("build_network: edge endpoint out of range");
    if (src == dst) throw std::invalid_argument("build_network: self-loop edge");
    if (net.edge(src, dst)) throw std::invalid_argument("build_network: duplicate edge");
    net.set_edge(src, dst, true);
  }
  return net;
}

DegreeSequences degrees(const Network& net) {
  const int n = net.n();
  DegreeSequences ds;
  ds.d.assign(n, 0);
  ds.b.assign(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && net.edge(i, j)) {
        ++ds.d[i];
        ++ds.b[j];
      }
  return ds;
}

std::vector<std::pair<int, BoundaryReason>> boundary_nodes(const Network& net) {
  const int n = net.n();
  const auto ds = degrees(net);
  std::vector<std::pair<int, BoundaryReason>> out;
  for (int i = 0; i < n; ++i) {
    if (ds.d[i] == 0) out.emplace_back(i, BoundaryReason::ZeroOut);
    if (ds.d[i] == n - 1 && n > 1) out.emplace_back(i, BoundaryReason::FullOut);
    if (ds.b[i] == 0) out.emplace_back(i, BoundaryReason::ZeroIn);
    if (ds.b[i] == n - 1 && n > 1) out.emplace_back(i, BoundaryReason::FullIn);
  }
  return out;
}

Network subnetwork(const Network& net, const std::vector<int>& nodes) {
  Network sub(static_cast<int>(nodes.size()));
  for (std::size_t a = 0; a < nodes.size(); ++a)
    for (std::size_t b = 0; b < nodes.size(); ++b)
      if (a != b && net.edge(nodes[a], nodes[b])) sub.set_edge(static_cast<int>(a), static_cast<int>(b), true);
  if (net.node_labels) {
    std::vector<std::string> labels;
    labels.reserve(nodes.size());
    for (int id : nodes) labels.push_back((*net.node_labels)[id]);
    sub.node_labels = std::move(labels);
  }
  return sub;
}

Covariates subcovariates(const Covariates& cov, const std::vector<int>& nodes) {
  Covariates sub(static_cast<int>(nodes.size()), cov.dim_x(), cov.dim_z());
  for (std::size_t a = 0; a < nodes.size(); ++a)
    for (std::size_t b = 0; b < nodes.size(); ++b) {
      if (a == b) continue;
      sub.set_x(static_cast<int>(a), static_cast<int>(b), cov.x(nodes[a], nodes[b]));
      if (a < b) sub.set_z(static_cast<int>(a), static_cast<int>(b), cov.z(nodes[a], nodes[b]));
    }
  sub.x_names = cov.x_names;
  sub.z_names = cov.z_names;
  return sub;
}

std::pair<Network, TrimTrace> trim_iteratively(const Network& net) {
  TrimTrace trace;
  std::vector<int> current(net.n());
  for (int i = 0; i < net.n(); ++i) current[i] = i;
  Network sub = net;
  while (sub.n() > 0) {
    auto flagged = boundary_nodes(sub);
    if (flagged.empty()) break;
    TrimRound round;
    std::set<int> removed;
    for (const auto& [local, reason] : flagged) {
      round.removed.emplace_back(current[local], reason);
      removed.insert(local);
    }
    trace.rounds.push_back(std::move(round));
    std::vector<int> keep_local, keep_orig;
    for (int i = 0; i < sub.n(); ++i)
      if (!removed.count(i)) {
        keep_local.push_back(i);
        keep_orig.push_back(current[i]);
      }
    sub = subnetwork(sub, keep_local);
    current = std::move(keep_orig);
  }
  trace.surviving = current;
  return {std::move(sub), std::move(trace)};
}

NetworkStats network_stats(const Network& net) {
  const int n = net.n();
  if (n < 2) throw std::invalid_argument("network_stats: need n >= 2");
  NetworkStats s;
  long links = 0, mutual = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (net.edge(i, j)) ++links;
      if (i < j && net.edge(i, j) && net.edge(j, i)) ++mutual;
    }
  s.density = static_cast<double>(links) / (static_cast<double>(n) * (n - 1));
  s.reciprocity_share = static_cast<double>(mutual) / (static_cast<double>(n) * (n - 1) / 2.0);
  // Directed global clustering: closed paths i->j->k with i->k over all paths i->j->k.
  long open = 0, closed = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (i == j || !net.edge(i, j)) continue;
      for (int k = 0; k < n; ++k) {
        if (k == j || k == i || !net.edge(j, k)) continue;
        ++open;
        if (net.edge(i, k)) ++closed;
      }
    }
  if (open > 0) s.transitivity = static_cast<double>(closed) / static_cast<double>(open);
  return s;
}

}  // namespace netfm
