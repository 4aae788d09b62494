#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "netfm/inference.hpp"
#include "netfm/solver.hpp"

namespace netfm {

/// Monte Carlo design: degree-heterogeneity law plus true coefficients.
struct McDesign {
  std::string design_id;  // A1..A3, B1..B3
  Variant variant = Variant::Reciprocal;
  int n = 100;
  double rho_L = -0.5, rho_H = -0.5;  // level by the sign of Z~_i
  double varpi0 = 1.0, varpi1 = 1.0;  // Beta shapes of the centered noise
  double beta0 = 1.0, rho0 = 1.0;
  int rounds = 1000;
  bool random_order = false;  // randomize within-dyad update order
  std::uint64_t seed = 1;

  static McDesign by_id(const std::string& id, Variant variant, int n);
};

/// One replication's primitives: covariates with intercept columns, the raw
/// fixed effects, and their normalized representation (last node's effects
/// absorbed into the intercepts).
struct DgpDraw {
  Covariates cov;
  VectorXd alpha_raw, gamma_raw;
  ModelSpec spec;
  Params true_params;
};

std::uint64_t splitmix64(std::uint64_t& state);
// Deterministic per-replication stream derived from (seed, rep).
std::mt19937_64 rep_stream(std::uint64_t seed, std::uint64_t rep);

double draw_logistic(std::mt19937_64& rng);
double draw_beta(std::mt19937_64& rng, double a, double b);

DgpDraw draw_dgp(const McDesign& design, std::mt19937_64& rng);

Network simulate_network(const DgpDraw& draw, const McDesign& design, std::mt19937_64& rng);

struct McCell {
  std::string name;
  double true_value = 0.0;  // averaged across replications (APEs vary per draw)
  double median_bias = 0.0;
  double sd = 0.0;
  double coverage = 0.0;  // nominal 95% intervals
  int n_used = 0;
};

struct McEstimatorSummary {
  Estimator estimator = Estimator::MLE;
  int attempts = 0;
  int successes = 0;
  std::vector<McCell> coef;  // slope coefficients only
  std::vector<McCell> ape;
};

struct McSummary {
  McDesign design;
  int reps = 0;
  double mean_density = 0.0;
  double mean_reciprocity = 0.0;
  double mean_transitivity = 0.0;
  double mle_success_rate = 0.0;
  std::vector<McEstimatorSummary> estimators;
};

struct ApeSpec {
  std::string name;  // covariate column name, e.g. "x" or "z"
  ApeKind kind = ApeKind::Binary;
};

McSummary run_mc(const McDesign& design, int reps, const std::vector<Estimator>& estimators,
                 const std::vector<ApeSpec>& ape_targets, const SolveOptions& opts = {}, int threads = 1);

}  // namespace netfm
