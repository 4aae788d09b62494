#pragma once

#include <string>

#include "netfm/solver.hpp"

namespace netfm {

enum class ApeFamily { X, Z };
enum class ApeKind { Continuous, Binary };

struct ApeTarget {
  std::string name;
  ApeFamily family = ApeFamily::X;
  ApeKind kind = ApeKind::Continuous;
  int index = 0;  // column within the family
};

struct ApePlugin {
  double delta = 0.0;
  MatrixXd delta_ij;  // n x n, zero diagonal
};

struct ApeResult {
  double delta_plugin = 0.0;
  double trace_correction = 0.0;  // 1/2 tr( [d2 Delta / dl dl'] S )
  double delta_corrected = 0.0;
  double variance = 0.0;   // V_{Delta,n}
  double std_error = 0.0;  // sqrt(V / N)
};

// Cov(theta_hat) = I_n^{-1} / N.
MatrixXd theta_covariance(const FitResult& fit);

ApePlugin ape_plugin(const FitResult& fit, const Network& net, const Covariates& cov, const ModelSpec& spec,
                     const ApeTarget& target);

// Trace-corrected APE with asymptotic variance, evaluated at a PL fit.
ApeResult ape_corrected(const FitResult& fit, const Network& net, const Covariates& cov, const ModelSpec& spec,
                        const ApeTarget& target);

// APE evaluated at explicit parameters (the per-replication estimand in
// Monte Carlo studies).
double ape_at(const Params& params, const Covariates& cov, const ModelSpec& spec, const ApeTarget& target);

// Gradient of the plug-in APE in (theta, lambda) at explicit parameters.
struct ApeGradient {
  double delta = 0.0;
  VectorXd d_theta;
  VectorXd d_lambda;
};

ApeGradient ape_gradient(const Params& params, const Covariates& cov, const ModelSpec& spec,
                         const ApeTarget& target);

// Resolves a "name:kind" CLI-style target against the covariate tables.
ApeTarget resolve_ape_target(const Covariates& cov, const ModelSpec& spec, const std::string& name,
                             ApeKind kind);

}  // namespace netfm
