#pragma once

#include <stdexcept>
#include <vector>

#include "netfm/model.hpp"

namespace netfm {

/// Parameters at or beyond the fixed-effects boundary: some det D_i has
/// collapsed. Callers treat the penalty as -infinity.
class PenaltyBoundaryError : public std::runtime_error {
 public:
  explicit PenaltyBoundaryError(int node)
      : std::runtime_error("penalty: non-positive det D_" + std::to_string(node)), node_(node) {}
  int node() const { return node_; }

 private:
  int node_;
};

struct PenaltyBlocks {
  std::vector<Eigen::Matrix2d> blocks;  // D_i, scalar in (0,0) for Undirected
  double eta = 0.0;
};

struct PenaltyGrad {
  VectorXd d_theta;
  VectorXd d_lambda;
};

// eta = 1/2 sum_i ln det D_i. The adjacency never enters: D_i uses model
// probabilities only.
PenaltyBlocks penalty_eta(const Network& net, const Covariates& cov, const ModelSpec& spec, const Params& params);

PenaltyGrad penalty_grad(const Network& net, const Covariates& cov, const ModelSpec& spec, const Params& params);

// d^2 eta / d lambda d lambda', dense.
MatrixXd penalty_hess_lambda(const Network& net, const Covariates& cov, const ModelSpec& spec, const Params& params);

}  // namespace netfm
