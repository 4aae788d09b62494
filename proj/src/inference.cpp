#include "netfm/inference.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace netfm {

namespace {

struct PairDerivs {
  double delta = 0.0;
  double d1[3] = {};     // d Delta_ij / d (B_ij, B_ji, C)
  double d2[3][3] = {};  // second derivatives in the same directions
  VectorXd dtheta;
};

// Delta_ij and its derivatives for the ordered pair (i,j). The dyad kernel is
// oriented so that statistic t0 is g_ij.
PairDerivs pair_ape(const Params& params, const Covariates& cov, const ModelSpec& spec, const ApeTarget& tgt,
                    int i, int j) {
  const int dt = spec.dim_theta();
  PairDerivs out;
  out.dtheta = VectorXd::Zero(dt);

  if (spec.variant == Variant::Undirected) {
    const DyadIndices idx = dyad_indices(params, cov, spec, i, j);
    if (tgt.kind == ApeKind::Continuous) {
      const UndirectedKernel ker(idx.B_ij);
      const double rk = params.rho(tgt.index);
      out.delta = rk * ker.k2;
      out.d1[0] = rk * ker.m3();
      out.d2[0][0] = rk * ker.ddk2();
      out.dtheta = rk * ker.m3() * VectorXd(cov.z(i, j));
      out.dtheta(tgt.index) += ker.k2;
    } else {
      const double z_obs = cov.z(i, j)(tgt.index);
      const double rk = params.rho(tgt.index);
      for (int w = 0; w <= 1; ++w) {
        const UndirectedKernel ker(idx.B_ij + rk * (w - z_obs));
        const double sgn = w == 1 ? 1.0 : -1.0;
        out.delta += sgn * ker.p;
        out.d1[0] += sgn * ker.k2;
        out.d2[0][0] += sgn * ker.m3();
        VectorXd zw = cov.z(i, j);
        zw(tgt.index) = w;
        out.dtheta += sgn * ker.k2 * zw;
      }
    }
    return out;
  }

  const DyadIndices idx = dyad_indices(params, cov, spec, i, j);
  auto gb = out.dtheta.head(spec.dim_beta);
  auto gr = out.dtheta.tail(spec.dim_rho);

  if (tgt.kind == ApeKind::Continuous) {
    const DyadKernel ker(idx);
    // Delta_ij = coef * dp_ij/d(index); the relevant statistic pair is
    // (t0, t0) for X regressors and (t0, t2) for Z regressors.
    const int s = tgt.family == ApeFamily::X ? 0 : 2;
    const double coef = tgt.family == ApeFamily::X ? params.beta(tgt.index) : params.rho(tgt.index);
    out.delta = coef * ker.k2[0][s];
    for (int b = 0; b < 3; ++b) out.d1[b] = coef * ker.m3(0, s, b);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) out.d2[a][b] = coef * ker.ddk2(0, s, a, b);
    if (spec.dim_beta > 0)
      gb = coef * (ker.m3(0, s, 0) * cov.x(i, j) + ker.m3(0, s, 1) * cov.x(j, i));
    if (spec.dim_rho > 0) gr = coef * ker.m3(0, s, 2) * VectorXd(cov.z(i, j));
    if (tgt.family == ApeFamily::X)
      gb(tgt.index) += ker.k2[0][s];
    else
      gr(tgt.index) += ker.k2[0][s];
    return out;
  }

  // Binary regressor: discrete difference between the two counterfactuals.
  for (int w = 0; w <= 1; ++w) {
    DyadIndices cf = idx;
    VectorXd x_cf = spec.dim_beta > 0 ? VectorXd(cov.x(i, j)) : VectorXd();
    VectorXd z_cf = spec.dim_rho > 0 ? VectorXd(cov.z(i, j)) : VectorXd();
    if (tgt.family == ApeFamily::X) {
      cf.B_ij += params.beta(tgt.index) * (w - x_cf(tgt.index));
      x_cf(tgt.index) = w;
    } else {
      cf.C_ij += params.rho(tgt.index) * (w - z_cf(tgt.index));
      z_cf(tgt.index) = w;
    }
    const DyadKernel ker(cf);
    const double sgn = w == 1 ? 1.0 : -1.0;
    out.delta += sgn * ker.mu[0];
    for (int b = 0; b < 3; ++b) out.d1[b] += sgn * ker.k2[0][b];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) out.d2[a][b] += sgn * ker.m3(0, a, b);
    if (spec.dim_beta > 0) gb += sgn * (ker.k2[0][0] * x_cf + ker.k2[0][1] * cov.x(j, i));
    if (spec.dim_rho > 0) gr += sgn * ker.k2[0][2] * z_cf;
  }
  return out;
}

void validate_target(const Covariates& cov, const ModelSpec& spec, const ApeTarget& tgt) {
  if (tgt.family == ApeFamily::X && (spec.dim_beta == 0 || tgt.index >= spec.dim_beta))
    throw std::invalid_argument("ape: X regressor index out of range for this variant");
  if (tgt.family == ApeFamily::Z && (spec.dim_rho == 0 || tgt.index >= spec.dim_rho))
    throw std::invalid_argument("ape: Z regressor index out of range for this variant");
  if (tgt.kind != ApeKind::Binary) return;
  const int n = cov.n();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double v = tgt.family == ApeFamily::X ? cov.x(i, j)(tgt.index) : cov.z(i, j)(tgt.index);
      if (v != 0.0 && v != 1.0)
        throw std::invalid_argument("ape: binary target '" + tgt.name + "' has non-binary data");
    }
}

struct ApeDerivs {
  double delta = 0.0;
  VectorXd d_theta;
  VectorXd d_lambda;
  std::vector<Eigen::Matrix2d> block_hess;  // node-block parts of d2 Delta/dl dl'
  Eigen::Matrix2d Tmat = Eigen::Matrix2d::Zero();  // U' [d2 Delta] U
};

ApeDerivs ape_derivs(const Params& params, const Covariates& cov, const ModelSpec& spec, const ApeTarget& tgt) {
  const int n = cov.n();
  const bool undirected = spec.variant == Variant::Undirected;
  ApeDerivs out;
  out.d_theta = VectorXd::Zero(spec.dim_theta());
  out.d_lambda = VectorXd::Zero(spec.dim_lambda(n));
  out.block_hess.assign(n - 1, Eigen::Matrix2d::Zero());
  const double scale = 1.0 / (static_cast<double>(n) * (n - 1));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const PairDerivs pd = pair_ape(params, cov, spec, tgt, i, j);
      out.delta += scale * pd.delta;
      out.d_theta += scale * pd.dtheta;
      if (undirected) {
        const int ci = i < n - 1 ? i : -1;
        const int cj = j < n - 1 ? j : -1;
        if (ci >= 0) out.d_lambda(ci) += scale * pd.d1[0];
        if (cj >= 0) out.d_lambda(cj) += scale * pd.d1[0];
        const double h = scale * pd.d2[0][0];
        if (ci >= 0) out.block_hess[ci](0, 0) += h;
        if (cj >= 0) out.block_hess[cj](0, 0) += h;
        const int present = (ci >= 0 ? 1 : 0) + (cj >= 0 ? 1 : 0);
        out.Tmat(0, 0) += h * present * present;
        continue;
      }
      // Local lambda coordinates and their natural directions: alpha_i and
      // gamma_j enter B_ij (dir 0), gamma_i and alpha_j enter B_ji (dir 1).
      const int coord[4] = {i < n - 1 ? 2 * i : -1, i < n - 1 ? 2 * i + 1 : -1,
                            j < n - 1 ? 2 * j : -1, j < n - 1 ? 2 * j + 1 : -1};
      const int dir[4] = {0, 1, 1, 0};
      const double usign[4] = {1.0, -1.0, 1.0, -1.0};  // u_- weight: +alpha, -gamma
      for (int a = 0; a < 4; ++a) {
        if (coord[a] < 0) continue;
        out.d_lambda(coord[a]) += scale * pd.d1[dir[a]];
      }
      for (int a = 0; a < 4; ++a) {
        if (coord[a] < 0) continue;
        for (int b = 0; b < 4; ++b) {
          if (coord[b] < 0) continue;
          const double h = scale * pd.d2[dir[a]][dir[b]];
          out.Tmat(0, 0) += h;
          out.Tmat(0, 1) += h * usign[b];
          out.Tmat(1, 0) += h * usign[a];
          out.Tmat(1, 1) += h * usign[a] * usign[b];
          // Node-block entries of the sparse lambda Hessian.
          const int node_a = coord[a] / 2, node_b = coord[b] / 2;
          if (node_a == node_b) out.block_hess[node_a](coord[a] % 2, coord[b] % 2) += h;
        }
      }
    }
  return out;
}

}  // namespace

MatrixXd theta_covariance(const FitResult& fit) {
  if (!fit.converged) throw std::invalid_argument("theta_covariance: fit did not converge");
  const int dl = static_cast<int>(fit.lambda_hat.size());
  const int n = fit.spec.variant == Variant::Undirected ? dl + 1 : dl / 2 + 1;
  const double N = static_cast<double>(n) * (n - 1);
  // The hybrid S can distort I_n in aggregate (intercept-like) directions,
  // even losing definiteness; the slope entries remain accurate, so only
  // outright singularity is treated as an error.
  Eigen::LDLT<MatrixXd> ldlt(fit.info_matrix);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().cwiseAbs().minCoeff() < 1e-300)
    throw std::runtime_error("theta_covariance: singular information matrix");
  return ldlt.solve(MatrixXd::Identity(fit.info_matrix.rows(), fit.info_matrix.cols())) / N;
}

ApePlugin ape_plugin(const FitResult& fit, const Network& net, const Covariates& cov, const ModelSpec& spec,
                     const ApeTarget& target) {
  validate_target(cov, spec, target);
  const Params p = Params::from_theta_lambda(spec, fit.theta_hat, fit.lambda_hat);
  const int n = net.n();
  ApePlugin out;
  out.delta_ij = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      out.delta_ij(i, j) = pair_ape(p, cov, spec, target, i, j).delta;
    }
  out.delta = out.delta_ij.sum() / (static_cast<double>(n) * (n - 1));
  return out;
}

double ape_at(const Params& params, const Covariates& cov, const ModelSpec& spec, const ApeTarget& target) {
  validate_target(cov, spec, target);
  const int n = cov.n();
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      acc += pair_ape(params, cov, spec, target, i, j).delta;
    }
  return acc / (static_cast<double>(n) * (n - 1));
}

ApeGradient ape_gradient(const Params& params, const Covariates& cov, const ModelSpec& spec,
                         const ApeTarget& target) {
  validate_target(cov, spec, target);
  const ApeDerivs d = ape_derivs(params, cov, spec, target);
  return {d.delta, d.d_theta, d.d_lambda};
}

ApeResult ape_corrected(const FitResult& fit, const Network& net, const Covariates& cov, const ModelSpec& spec,
                        const ApeTarget& target) {
  validate_target(cov, spec, target);
  if (!fit.converged) throw std::invalid_argument("ape_corrected: fit did not converge");
  const int n = net.n();
  const double N = static_cast<double>(n) * (n - 1);
  const Params p = Params::from_theta_lambda(spec, fit.theta_hat, fit.lambda_hat);
  const HessianParts H = hessian_parts(net, cov, spec, p);
  const HybridInverse S(H);
  const ApeDerivs d = ape_derivs(p, cov, spec, target);

  // tr([d2 Delta] S): node blocks against D^{-1} plus the rank-two U term.
  double trace = 0.0;
  for (int k = 0; k < n - 1; ++k) {
    Eigen::Matrix2d Dinv;
    if (spec.variant == Variant::Undirected) {
      Dinv.setZero();
      Dinv(0, 0) = 1.0 / H.blocks[k](0, 0);
    } else {
      Dinv = H.blocks[k].inverse();
    }
    trace += (d.block_hess[k] * Dinv).trace();
  }
  Eigen::Matrix2d core_inv = Eigen::Matrix2d::Zero();
  if (spec.variant == Variant::Undirected)
    core_inv(0, 0) = 1.0 / S.core()(0, 0);
  else
    core_inv = S.core().inverse();
  trace += (core_inv * d.Tmat).trace();

  ApeResult out;
  out.delta_plugin = d.delta;
  out.trace_correction = 0.5 * trace;
  out.delta_corrected = d.delta - out.trace_correction;

  const VectorXd Sdl = S.apply(d.d_lambda);
  const VectorXd a = d.d_theta + H.H_tl * Sdl;
  Eigen::LDLT<MatrixXd> ldlt(fit.info_matrix);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("ape_corrected: singular information matrix");
  out.variance = a.dot(ldlt.solve(a)) + N * d.d_lambda.dot(Sdl);
  out.std_error = std::sqrt(std::max(0.0, out.variance) / N);
  return out;
}

ApeTarget resolve_ape_target(const Covariates& cov, const ModelSpec& spec, const std::string& name,
                             ApeKind kind) {
  ApeTarget tgt;
  tgt.name = name;
  tgt.kind = kind;
  if (cov.x_names) {
    for (std::size_t k = 0; k < cov.x_names->size(); ++k)
      if ((*cov.x_names)[k] == name) {
        tgt.family = ApeFamily::X;
        tgt.index = static_cast<int>(k);
        validate_target(cov, spec, tgt);
        return tgt;
      }
  }
  if (cov.z_names) {
    for (std::size_t k = 0; k < cov.z_names->size(); ++k)
      if ((*cov.z_names)[k] == name) {
        tgt.family = ApeFamily::Z;
        tgt.index = static_cast<int>(k);
        validate_target(cov, spec, tgt);
        return tgt;
      }
  }
  throw std::invalid_argument("unknown APE regressor: " + name);
}

}  // namespace netfm
