#pragma once

#include <optional>
#include <string>
#include <vector>

#include "netfm/model.hpp"
#include "netfm/penalty.hpp"

namespace netfm {

enum class Estimator { MLE, PL, EC };

std::string to_string(Estimator e);

struct SolveOptions {
  double inner_tol_scale = 1e-8;  // inner gradient tolerance, times max(1, n)
  double outer_tol_scale = 1e-6;  // outer gradient tolerance, times N = n(n-1)
  int max_outer = 200;
  int max_inner = 200;
  double diverge_threshold = 30.0;  // |lambda_k| beyond this declares MLE nonexistence
  bool trim_on_nonexistence = false;
  bool use_iterative = false;  // S-preconditioned CG instead of the dense factored solve
  double armijo = 1e-4;
};

/// Action of the hybrid inverse approximation
/// S = D^{-1} + U [U'(-H_ll)U]^{-1} U' on fixed-effects vectors.
class HybridInverse {
 public:
  explicit HybridInverse(const HessianParts& H);

  VectorXd apply(const VectorXd& f) const;
  // (-H_ll) v from the factored form, O(n^2).
  static VectorXd neg_hll_apply(const HessianParts& H, const VectorXd& v);

  const Eigen::Matrix2d& core() const { return core_; }

 private:
  const HessianParts* H_;
  std::vector<Eigen::Matrix2d> blocks_inv_;
  Eigen::Matrix2d core_;      // U'(-H_ll)U (1x1 in (0,0) for Undirected)
  Eigen::Matrix2d core_inv_;
  int rank_ = 2;
};

struct ExistenceInfo {
  bool exists = true;
  std::vector<int> diverged_nodes;
  std::optional<TrimTrace> trimmed_sample;
};

struct IterationRecord {
  double objective = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
};

struct FitResult {
  ModelSpec spec;
  Estimator estimator = Estimator::MLE;
  VectorXd theta_hat;
  VectorXd lambda_hat;
  double loglik = std::numeric_limits<double>::quiet_NaN();
  double penalized_obj = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  std::vector<IterationRecord> trace;
  ExistenceInfo existence;
  MatrixXd info_matrix;  // I_n at the estimates
  VectorXd bias_hat;     // EC only
};

struct InnerResult {
  VectorXd lambda;
  bool converged = false;
  ExistenceInfo existence;
  int iterations = 0;
  double objective = 0.0;
};

InnerResult inner_newton_lambda(const Network& net, const Covariates& cov, const ModelSpec& spec,
                                const VectorXd& theta, const VectorXd& lambda0, bool penalized,
                                const SolveOptions& opts = {});

FitResult fit_mle(const Network& net, const Covariates& cov, const ModelSpec& spec, const SolveOptions& opts = {});
FitResult fit_pl(const Network& net, const Covariates& cov, const ModelSpec& spec, const SolveOptions& opts = {});
FitResult fit_ec(const Network& net, const Covariates& cov, const ModelSpec& spec, const SolveOptions& opts = {});
// Analytic bias subtraction applied to an existing MLE fit.
FitResult ec_from_mle(const FitResult& mle_fit, const Network& net, const Covariates& cov, const ModelSpec& spec);

// I_n = -(1/N) (H_tt + H_tl S H_lt) with N = n(n-1).
MatrixXd information_matrix(const HessianParts& H);

}  // namespace netfm
