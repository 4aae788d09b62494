#pragma once

#include <array>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "netfm/network.hpp"

namespace netfm {

enum class Variant { Reciprocal, DirectedNoRecip, Undirected };

std::string to_string(Variant v);

struct ModelSpec {
  Variant variant = Variant::Reciprocal;
  int dim_beta = 0;
  int dim_rho = 0;

  int dim_theta() const { return dim_beta + dim_rho; }
  // Length of the fixed-effects vector under alpha_n = gamma_n = 0.
  int dim_lambda(int n) const { return variant == Variant::Undirected ? n - 1 : 2 * (n - 1); }
  void validate() const;
};

/// theta = (beta', rho')', lambda ordered by node: (alpha_1, gamma_1, ...).
struct Params {
  VectorXd beta;
  VectorXd rho;
  VectorXd lambda;

  double alpha(int i, int n, const ModelSpec& spec) const {
    if (i == n - 1) return 0.0;
    return spec.variant == Variant::Undirected ? lambda(i) : lambda(2 * i);
  }
  double gamma(int i, int n, const ModelSpec& spec) const {
    if (i == n - 1) return 0.0;
    return spec.variant == Variant::Undirected ? lambda(i) : lambda(2 * i + 1);
  }
  VectorXd theta() const;
  static Params from_theta_lambda(const ModelSpec& spec, const VectorXd& theta, const VectorXd& lambda);
};

struct DyadIndices {
  double B_ij = 0.0;  // single index for the Undirected variant
  double B_ji = 0.0;
  double C_ij = 0.0;
};

struct DyadProbs {
  double pi00 = 0, pi10 = 0, pi01 = 0, pi11 = 0;
  double p_ij = 0, p_ji = 0, p11 = 0;
};

/// Four-state dyad distribution with central moments of the sufficient
/// statistics t = (g_ij, g_ji, g_ij*g_ji). All derivatives of the dyad
/// probabilities with respect to (B_ij, B_ji, C_ij) are cumulants of t,
/// computed exactly from the state enumeration.
struct DyadKernel {
  std::array<double, 4> pi{};     // states ordered 00, 10, 01, 11
  std::array<double, 3> mu{};     // (p_ij, p_ji, p11)
  double k2[3][3] = {};           // central covariance = Jacobian of mu in (B_ij,B_ji,C)

  explicit DyadKernel(const DyadIndices& idx);

  double m3(int a, int b, int c) const;        // third central moment
  double m4(int a, int b, int c, int d) const; // fourth central moment
  // d k2(k,l) / d t_b  (third central moment)
  double dk2(int k, int l, int b) const { return m3(k, l, b); }
  // d^2 k2(k,l) / d t_a d t_b
  double ddk2(int k, int l, int a, int b) const;

 private:
  double dev_[4][3] = {};  // per-state deviations t - mu
};

/// Bernoulli kernel for the undirected variant: single stat g with success p.
struct UndirectedKernel {
  double p = 0;
  double k2 = 0;   // p(1-p)
  explicit UndirectedKernel(double index);
  double m3() const { return p * (1 - p) * (1 - 2 * p); }
  double ddk2() const;  // d^2 [p(1-p)] / d index^2
};

struct HessianParts {
  MatrixXd H_tt;                       // dim_theta x dim_theta
  MatrixXd H_tl;                       // dim_theta x dim_lambda
  std::vector<Eigen::Matrix2d> blocks; // n-1 node blocks D_i of -H_ll (scalar in (0,0) for Undirected)
  // Per unordered dyad {i,j}, i<j<n-1 stored as (i,j): 2x2 covariance
  // [[Var(g_ij), Cov(g_ij,g_ji)], [Cov, Var(g_ji)]] giving -H_ll cross blocks.
  std::map<std::pair<int, int>, Eigen::Matrix2d> dyad_cov;
  int n = 0;
  ModelSpec spec;

  // Dense -H_ll reconstruction, for oracles and the inner solver.
  MatrixXd neg_Hll_dense() const;
};

DyadIndices dyad_indices(const Params& params, const Covariates& cov, const ModelSpec& spec, int i, int j);
DyadProbs dyad_probs(const DyadIndices& idx);
DyadProbs dyad_probs_undirected(const DyadIndices& idx);

double log_likelihood(const Network& net, const Covariates& cov, const ModelSpec& spec, const Params& params);

struct Score {
  VectorXd g_theta;
  VectorXd g_lambda;
};

Score score(const Network& net, const Covariates& cov, const ModelSpec& spec, const Params& params);

HessianParts hessian_parts(const Network& net, const Covariates& cov, const ModelSpec& spec, const Params& params);

void check_dimensions(const Network& net, const Covariates& cov, const ModelSpec& spec, const Params& params);

}  // namespace netfm
