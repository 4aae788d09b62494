#include "netfm/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace netfm {

namespace {

// Sufficient statistics (g_ij, g_ji, g_ij*g_ji) per state 00, 10, 01, 11.
constexpr double kStat[4][3] = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 1}};

double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Reciprocal: return "reciprocal";
    case Variant::DirectedNoRecip: return "directed-norecip";
    case Variant::Undirected: return "undirected";
  }
  return "?";
}

void ModelSpec::validate() const {
  if (dim_beta < 0 || dim_rho < 0) throw std::invalid_argument("ModelSpec: negative covariate dimension");
  if (variant == Variant::DirectedNoRecip && dim_rho != 0)
    throw std::invalid_argument("ModelSpec: DirectedNoRecip requires dim_rho = 0");
  if (variant == Variant::Undirected && dim_beta != 0)
    throw std::invalid_argument("ModelSpec: Undirected requires dim_beta = 0");
}

VectorXd Params::theta() const {
  VectorXd t(beta.size() + rho.size());
  t << beta, rho;
  return t;
}

Params Params::from_theta_lambda(const ModelSpec& spec, const VectorXd& theta, const VectorXd& lambda) {
  if (theta.size() != spec.dim_theta()) throw std::invalid_argument("Params: theta dimension mismatch");
  Params p;
  p.beta = theta.head(spec.dim_beta);
  p.rho = theta.tail(spec.dim_rho);
  p.lambda = lambda;
  return p;
}

DyadKernel::DyadKernel(const DyadIndices& idx) {
  const double e[4] = {0.0, idx.B_ij, idx.B_ji, idx.B_ij + idx.B_ji + idx.C_ij};
  const double m = std::max(std::max(e[0], e[1]), std::max(e[2], e[3]));
  double K = 0.0;
  for (int s = 0; s < 4; ++s) {
    pi[s] = std::exp(e[s] - m);
    K += pi[s];
  }
  for (int s = 0; s < 4; ++s) pi[s] /= K;
  for (int k = 0; k < 3; ++k) {
    mu[k] = 0.0;
    for (int s = 0; s < 4; ++s) mu[k] += pi[s] * kStat[s][k];
  }
  for (int s = 0; s < 4; ++s)
    for (int k = 0; k < 3; ++k) dev_[s][k] = kStat[s][k] - mu[k];
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l) {
      double v = 0.0;
      for (int s = 0; s < 4; ++s) v += pi[s] * dev_[s][k] * dev_[s][l];
      k2[k][l] = v;
    }
}

double DyadKernel::m3(int a, int b, int c) const {
  double v = 0.0;
  for (int s = 0; s < 4; ++s) v += pi[s] * dev_[s][a] * dev_[s][b] * dev_[s][c];
  return v;
}

double DyadKernel::m4(int a, int b, int c, int d) const {
  double v = 0.0;
  for (int s = 0; s < 4; ++s) v += pi[s] * dev_[s][a] * dev_[s][b] * dev_[s][c] * dev_[s][d];
  return v;
}

double DyadKernel::ddk2(int k, int l, int a, int b) const {
  return m4(k, l, b, a) - k2[k][a] * k2[l][b] - k2[l][a] * k2[k][b] - k2[a][b] * k2[k][l];
}

UndirectedKernel::UndirectedKernel(double index) {
  p = logistic(index);
  k2 = p * (1 - p);
}

double UndirectedKernel::ddk2() const { return k2 * ((1 - 2 * p) * (1 - 2 * p) - 2 * k2); }

DyadIndices dyad_indices(const Params& params, const Covariates& cov, const ModelSpec& spec, int i, int j) {
  const int n = cov.n();
  if (i == j || i < 0 || j < 0 || i >= n || j >= n) throw std::out_of_range("dyad_indices: invalid dyad");
  DyadIndices idx;
  if (spec.variant == Variant::Undirected) {
    idx.B_ij = (spec.dim_rho > 0 ? cov.z(i, j).dot(params.rho) : 0.0) +
               params.alpha(i, n, spec) + params.alpha(j, n, spec);
    return idx;
  }
  idx.B_ij = (spec.dim_beta > 0 ? cov.x(i, j).dot(params.beta) : 0.0) +
             params.alpha(i, n, spec) + params.gamma(j, n, spec);
  idx.B_ji = (spec.dim_beta > 0 ? cov.x(j, i).dot(params.beta) : 0.0) +
             params.alpha(j, n, spec) + params.gamma(i, n, spec);
  idx.C_ij = (spec.variant == Variant::Reciprocal && spec.dim_rho > 0) ? cov.z(i, j).dot(params.rho) : 0.0;
  return idx;
}

DyadProbs dyad_probs(const DyadIndices& idx) {
  if (!std::isfinite(idx.B_ij) || !std::isfinite(idx.B_ji) || !std::isfinite(idx.C_ij))
    throw std::invalid_argument("dyad_probs: non-finite index");
  DyadKernel ker(idx);
  DyadProbs p;
  p.pi00 = ker.pi[0];
  p.pi10 = ker.pi[1];
  p.pi01 = ker.pi[2];
  p.pi11 = ker.pi[3];
  p.p_ij = ker.mu[0];
  p.p_ji = ker.mu[1];
  p.p11 = ker.mu[2];
  return p;
}

DyadProbs dyad_probs_undirected(const DyadIndices& idx) {
  if (!std::isfinite(idx.B_ij)) throw std::invalid_argument("dyad_probs_undirected: non-finite index");
  const double p = logistic(idx.B_ij);
  DyadProbs dp;
  dp.pi11 = p;
  dp.pi00 = 1 - p;
  dp.p_ij = dp.p_ji = dp.p11 = p;
  return dp;
}

void check_dimensions(const Network& net, const Covariates& cov, const ModelSpec& spec, const Params& params) {
  spec.validate();
  if (net.n() != cov.n()) throw std::invalid_argument("network / covariate node count mismatch");
  if (cov.dim_x() < spec.dim_beta || cov.dim_z() < spec.dim_rho)
    throw std::invalid_argument("covariate dimension below model dimension");
  if (params.beta.size() != spec.dim_beta || params.rho.size() != spec.dim_rho)
    throw std::invalid_argument("theta dimension mismatch");
  if (params.lambda.size() != spec.dim_lambda(net.n()))
    throw std::invalid_argument("lambda dimension mismatch");
  if (!params.beta.allFinite() || !params.rho.allFinite() || !params.lambda.allFinite())
    throw std::invalid_argument("non-finite parameter value");
}

double log_likelihood(const Network& net, const Covariates& cov, const ModelSpec& spec, const Params& params) {
  check_dimensions(net, cov, spec, params);
  const int n = net.n();
  double ll = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const DyadIndices idx = dyad_indices(params, cov, spec, i, j);
      if (spec.variant == Variant::Undirected) {
        const double g = net.edge(i, j) ? 1.0 : 0.0;
        // ln Bernoulli(g; sigma(B)) = g*B - ln(1+e^B)
        const double m = std::max(0.0, idx.B_ij);
        ll += g * idx.B_ij - (m + std::log(std::exp(-m) + std::exp(idx.B_ij - m)));
        continue;
      }
      const double g1 = net.edge(i, j) ? 1.0 : 0.0;
      const double g2 = net.edge(j, i) ? 1.0 : 0.0;
      const double e[4] = {0.0, idx.B_ij, idx.B_ji, idx.B_ij + idx.B_ji + idx.C_ij};
      const double m = std::max(std::max(e[0], e[1]), std::max(e[2], e[3]));
      double K = 0.0;
      for (double es : e) K += std::exp(es - m);
      ll += g1 * idx.B_ij + g2 * idx.B_ji + g1 * g2 * idx.C_ij - m - std::log(K);
    }
  return ll;
}

Score score(const Network& net, const Covariates& cov, const ModelSpec& spec, const Params& params) {
  check_dimensions(net, cov, spec, params);
  const int n = net.n();
  Score sc;
  sc.g_theta = VectorXd::Zero(spec.dim_theta());
  sc.g_lambda = VectorXd::Zero(spec.dim_lambda(n));
  auto gb = sc.g_theta.head(spec.dim_beta);
  auto gr = sc.g_theta.tail(spec.dim_rho);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const DyadIndices idx = dyad_indices(params, cov, spec, i, j);
      if (spec.variant == Variant::Undirected) {
        const double g = net.edge(i, j) ? 1.0 : 0.0;
        const double r = g - logistic(idx.B_ij);
        if (spec.dim_rho > 0) gr += r * cov.z(i, j);
        if (i < n - 1) sc.g_lambda(i) += r;
        if (j < n - 1) sc.g_lambda(j) += r;
        continue;
      }
      const DyadProbs p = dyad_probs(idx);
      const double g1 = net.edge(i, j) ? 1.0 : 0.0;
      const double g2 = net.edge(j, i) ? 1.0 : 0.0;
      const double r1 = g1 - p.p_ij;
      const double r2 = g2 - p.p_ji;
      const double r11 = g1 * g2 - p.p11;
      if (spec.dim_beta > 0) gb += r1 * cov.x(i, j) + r2 * cov.x(j, i);
      if (spec.dim_rho > 0) gr += r11 * cov.z(i, j);
      if (i < n - 1) {
        sc.g_lambda(2 * i) += r1;      // alpha_i pairs with g_ij
        sc.g_lambda(2 * i + 1) += r2;  // gamma_i pairs with g_ji
      }
      if (j < n - 1) {
        sc.g_lambda(2 * j) += r2;
        sc.g_lambda(2 * j + 1) += r1;
      }
    }
  return sc;
}

HessianParts hessian_parts(const Network& net, const Covariates& cov, const ModelSpec& spec, const Params& params) {
  check_dimensions(net, cov, spec, params);
  const int n = net.n();
  const int dt = spec.dim_theta();
  const int dl = spec.dim_lambda(n);
  HessianParts H;
  H.n = n;
  H.spec = spec;
  H.H_tt = MatrixXd::Zero(dt, dt);
  H.H_tl = MatrixXd::Zero(dt, dl);
  H.blocks.assign(n - 1, Eigen::Matrix2d::Zero());
  MatrixXd ntt = MatrixXd::Zero(dt, dt);  // accumulated -H_tt
  MatrixXd ntl = MatrixXd::Zero(dt, dl);  // accumulated -H_tl
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const DyadIndices idx = dyad_indices(params, cov, spec, i, j);
      if (spec.variant == Variant::Undirected) {
        const UndirectedKernel ker(idx.B_ij);
        if (spec.dim_rho > 0) {
          const VectorXd z = cov.z(i, j);
          ntt += ker.k2 * z * z.transpose();
          if (i < n - 1) ntl.col(i) += ker.k2 * z;
          if (j < n - 1) ntl.col(j) += ker.k2 * z;
        }
        if (i < n - 1) H.blocks[i](0, 0) += ker.k2;
        if (j < n - 1) H.blocks[j](0, 0) += ker.k2;
        if (i < n - 1 && j < n - 1) {
          Eigen::Matrix2d c = Eigen::Matrix2d::Zero();
          c(0, 0) = ker.k2;
          H.dyad_cov[{i, j}] = c;
        }
        continue;
      }
      const DyadKernel ker(idx);
      // Weight vectors coupling theta to the dyad statistics (t1, t2, t3).
      if (dt > 0) {
        VectorXd w[3];
        for (auto& w_s : w) w_s = VectorXd::Zero(dt);
        if (spec.dim_beta > 0) {
          w[0].head(spec.dim_beta) = cov.x(i, j);
          w[1].head(spec.dim_beta) = cov.x(j, i);
        }
        if (spec.dim_rho > 0) w[2].tail(spec.dim_rho) = cov.z(i, j);
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b)
            if (ker.k2[a][b] != 0.0) ntt += ker.k2[a][b] * w[a] * w[b].transpose();
        // lambda columns: alpha_i ~ t1, gamma_i ~ t2, alpha_j ~ t2, gamma_j ~ t1
        const int lam_col[4] = {i < n - 1 ? 2 * i : -1, i < n - 1 ? 2 * i + 1 : -1,
                                j < n - 1 ? 2 * j : -1, j < n - 1 ? 2 * j + 1 : -1};
        const int lam_stat[4] = {0, 1, 1, 0};
        for (int c = 0; c < 4; ++c) {
          if (lam_col[c] < 0) continue;
          for (int a = 0; a < 3; ++a) ntl.col(lam_col[c]) += ker.k2[a][lam_stat[c]] * w[a];
        }
      }
      Eigen::Matrix2d cov12;
      cov12 << ker.k2[0][0], ker.k2[0][1], ker.k2[0][1], ker.k2[1][1];
      if (i < n - 1) H.blocks[i] += cov12;
      if (j < n - 1) {
        Eigen::Matrix2d flip;  // node j couples (alpha_j, gamma_j) to (t2, t1)
        flip << ker.k2[1][1], ker.k2[0][1], ker.k2[0][1], ker.k2[0][0];
        H.blocks[j] += flip;
      }
      if (i < n - 1 && j < n - 1) H.dyad_cov[{i, j}] = cov12;
    }
  H.H_tt = -ntt;
  H.H_tl = -ntl;
  return H;
}

MatrixXd HessianParts::neg_Hll_dense() const {
  const int dl = spec.dim_lambda(n);
  MatrixXd M = MatrixXd::Zero(dl, dl);
  if (spec.variant == Variant::Undirected) {
    for (int i = 0; i < n - 1; ++i) M(i, i) = blocks[i](0, 0);
    for (const auto& [dyad, c] : dyad_cov) {
      M(dyad.first, dyad.second) = c(0, 0);
      M(dyad.second, dyad.first) = c(0, 0);
    }
    return M;
  }
  for (int i = 0; i < n - 1; ++i) M.block<2, 2>(2 * i, 2 * i) = blocks[i];
  for (const auto& [dyad, c] : dyad_cov) {
    const int a = dyad.first, b = dyad.second;
    // rows (alpha_a, gamma_a), cols (alpha_b, gamma_b):
    // Cov(t1,t2), Cov(t1,t1); Cov(t2,t2), Cov(t2,t1)
    Eigen::Matrix2d cross;
    cross << c(0, 1), c(0, 0), c(1, 1), c(0, 1);
    M.block<2, 2>(2 * a, 2 * b) = cross;
    M.block<2, 2>(2 * b, 2 * a) = cross.transpose();
  }
  return M;
}

}  // namespace netfm
