#include "netfm/penalty.hpp"

#include <cmath>

namespace netfm {

namespace {

constexpr double kDetFloor = 1e-300;

double tr_prod(const Eigen::Matrix2d& m, double a00, double a01, double a11) {
  return m(0, 0) * a00 + 2.0 * m(0, 1) * a01 + m(1, 1) * a11;
}

std::vector<Eigen::Matrix2d> compute_blocks(const Covariates& cov, const ModelSpec& spec, const Params& params) {
  const int n = cov.n();
  std::vector<Eigen::Matrix2d> blocks(n - 1, Eigen::Matrix2d::Zero());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const DyadIndices idx = dyad_indices(params, cov, spec, i, j);
      if (spec.variant == Variant::Undirected) {
        const UndirectedKernel ker(idx.B_ij);
        if (i < n - 1) blocks[i](0, 0) += ker.k2;
        if (j < n - 1) blocks[j](0, 0) += ker.k2;
        continue;
      }
      const DyadKernel ker(idx);
      if (i < n - 1) {
        blocks[i](0, 0) += ker.k2[0][0];
        blocks[i](0, 1) += ker.k2[0][1];
        blocks[i](1, 0) += ker.k2[0][1];
        blocks[i](1, 1) += ker.k2[1][1];
      }
      if (j < n - 1) {
        blocks[j](0, 0) += ker.k2[1][1];
        blocks[j](0, 1) += ker.k2[0][1];
        blocks[j](1, 0) += ker.k2[0][1];
        blocks[j](1, 1) += ker.k2[0][0];
      }
    }
  return blocks;
}

// Inverts each D_i, throwing at the boundary. Undirected blocks are scalar.
std::vector<Eigen::Matrix2d> invert_blocks(const std::vector<Eigen::Matrix2d>& blocks, Variant variant) {
  std::vector<Eigen::Matrix2d> inv(blocks.size(), Eigen::Matrix2d::Zero());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (variant == Variant::Undirected) {
      const double d = blocks[i](0, 0);
      if (!(d > kDetFloor)) throw PenaltyBoundaryError(static_cast<int>(i));
      inv[i](0, 0) = 1.0 / d;
      continue;
    }
    const double det = blocks[i](0, 0) * blocks[i](1, 1) - blocks[i](0, 1) * blocks[i](0, 1);
    if (!(det > kDetFloor)) throw PenaltyBoundaryError(static_cast<int>(i));
    inv[i](0, 0) = blocks[i](1, 1) / det;
    inv[i](1, 1) = blocks[i](0, 0) / det;
    inv[i](0, 1) = inv[i](1, 0) = -blocks[i](0, 1) / det;
  }
  return inv;
}

}  // namespace

PenaltyBlocks penalty_eta(const Network& net, const Covariates& cov, const ModelSpec& spec, const Params& params) {
  check_dimensions(net, cov, spec, params);
  PenaltyBlocks out;
  out.blocks = compute_blocks(cov, spec, params);
  out.eta = 0.0;
  for (std::size_t i = 0; i < out.blocks.size(); ++i) {
    const double det = spec.variant == Variant::Undirected
                           ? out.blocks[i](0, 0)
                           : out.blocks[i](0, 0) * out.blocks[i](1, 1) - out.blocks[i](0, 1) * out.blocks[i](0, 1);
    if (!(det > kDetFloor)) throw PenaltyBoundaryError(static_cast<int>(i));
    out.eta += 0.5 * std::log(det);
  }
  return out;
}

PenaltyGrad penalty_grad(const Network& net, const Covariates& cov, const ModelSpec& spec, const Params& params) {
  check_dimensions(net, cov, spec, params);
  const int n = net.n();
  const auto blocks = compute_blocks(cov, spec, params);
  const auto inv = invert_blocks(blocks, spec.variant);
  PenaltyGrad g;
  g.d_theta = VectorXd::Zero(spec.dim_theta());
  g.d_lambda = VectorXd::Zero(spec.dim_lambda(n));
  auto gb = g.d_theta.head(spec.dim_beta);
  auto gr = g.d_theta.tail(spec.dim_rho);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const DyadIndices idx = dyad_indices(params, cov, spec, i, j);
      if (spec.variant == Variant::Undirected) {
        const UndirectedKernel ker(idx.B_ij);
        double c = 0.0;
        if (i < n - 1) c += ker.m3() * inv[i](0, 0);
        if (j < n - 1) c += ker.m3() * inv[j](0, 0);
        if (spec.dim_rho > 0) gr += 0.5 * c * cov.z(i, j);
        if (i < n - 1) g.d_lambda(i) += 0.5 * c;
        if (j < n - 1) g.d_lambda(j) += 0.5 * c;
        continue;
      }
      const DyadKernel ker(idx);
      double c[3];
      for (int b = 0; b < 3; ++b) {
        c[b] = 0.0;
        if (i < n - 1) c[b] += tr_prod(inv[i], ker.m3(0, 0, b), ker.m3(0, 1, b), ker.m3(1, 1, b));
        if (j < n - 1) c[b] += tr_prod(inv[j], ker.m3(1, 1, b), ker.m3(0, 1, b), ker.m3(0, 0, b));
      }
      if (spec.dim_beta > 0) gb += 0.5 * (c[0] * cov.x(i, j) + c[1] * cov.x(j, i));
      if (spec.dim_rho > 0) gr += 0.5 * c[2] * cov.z(i, j);
      if (i < n - 1) {
        g.d_lambda(2 * i) += 0.5 * c[0];      // alpha_i enters B_ij
        g.d_lambda(2 * i + 1) += 0.5 * c[1];  // gamma_i enters B_ji
      }
      if (j < n - 1) {
        g.d_lambda(2 * j) += 0.5 * c[1];
        g.d_lambda(2 * j + 1) += 0.5 * c[0];
      }
    }
  return g;
}

MatrixXd penalty_hess_lambda(const Network& net, const Covariates& cov, const ModelSpec& spec, const Params& params) {
  check_dimensions(net, cov, spec, params);
  const int n = net.n();
  const int dl = spec.dim_lambda(n);
  const auto blocks = compute_blocks(cov, spec, params);
  const auto inv = invert_blocks(blocks, spec.variant);
  MatrixXd acc = MatrixXd::Zero(dl, dl);

  if (spec.variant == Variant::Undirected) {
    // V(k, a) = d D_k / d lambda_a, one row per block.
    MatrixXd V = MatrixXd::Zero(n - 1, dl);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const DyadIndices idx = dyad_indices(params, cov, spec, i, j);
        const UndirectedKernel ker(idx.B_ij);
        const double m3 = ker.m3();
        const double dd = ker.ddk2();
        if (i < n - 1) {
          if (i < n - 1) V(i, i) += m3;
          if (j < n - 1) V(i, j) += m3;
        }
        if (j < n - 1) {
          if (i < n - 1) V(j, i) += m3;
          if (j < n - 1) V(j, j) += m3;
        }
        double s = 0.0;
        if (i < n - 1) s += dd * inv[i](0, 0);
        if (j < n - 1) s += dd * inv[j](0, 0);
        const int coords[2] = {i < n - 1 ? i : -1, j < n - 1 ? j : -1};
        for (int u : coords)
          for (int v : coords)
            if (u >= 0 && v >= 0) acc(u, v) += 0.5 * s;
      }
    for (int k = 0; k < n - 1; ++k) {
      const double w = inv[k](0, 0);
      acc.noalias() -= 0.5 * w * w * V.row(k).transpose() * V.row(k);
    }
    return acc;
  }

  // Per-block derivative tables: V[k] is 3 x dl with columns vec3(dD_k/dlambda_a),
  // vec3 ordering (d00, d01, d11).
  std::vector<MatrixXd> V(n - 1, MatrixXd::Zero(3, dl));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const DyadIndices idx = dyad_indices(params, cov, spec, i, j);
      const DyadKernel ker(idx);
      // Natural directions: b=0 is B_ij (coords alpha_i, gamma_j), b=1 is B_ji.
      const int dir_coords[2][2] = {{i < n - 1 ? 2 * i : -1, j < n - 1 ? 2 * j + 1 : -1},
                                    {i < n - 1 ? 2 * i + 1 : -1, j < n - 1 ? 2 * j : -1}};
      for (int b = 0; b < 2; ++b) {
        const double v00 = ker.m3(0, 0, b), v01 = ker.m3(0, 1, b), v11 = ker.m3(1, 1, b);
        for (int c : dir_coords[b]) {
          if (c < 0) continue;
          if (i < n - 1) {
            V[i](0, c) += v00;
            V[i](1, c) += v01;
            V[i](2, c) += v11;
          }
          if (j < n - 1) {
            V[j](0, c) += v11;  // block j sees the flipped orientation
            V[j](1, c) += v01;
            V[j](2, c) += v00;
          }
        }
      }
      for (int a = 0; a < 2; ++a)
        for (int b = a; b < 2; ++b) {
          double s = 0.0;
          const double d00 = ker.ddk2(0, 0, a, b), d01 = ker.ddk2(0, 1, a, b), d11 = ker.ddk2(1, 1, a, b);
          if (i < n - 1) s += tr_prod(inv[i], d00, d01, d11);
          if (j < n - 1) s += tr_prod(inv[j], d11, d01, d00);
          for (int u : dir_coords[a])
            for (int v : dir_coords[b]) {
              if (u < 0 || v < 0) continue;
              acc(u, v) += 0.5 * s;
              if (a != b) acc(v, u) += 0.5 * s;
            }
        }
    }
  for (int k = 0; k < n - 1; ++k) {
    const double m00 = inv[k](0, 0), m01 = inv[k](0, 1), m11 = inv[k](1, 1);
    Eigen::Matrix3d K;  // vec3' K vec3 == tr(M A M B) for symmetric A, B
    K << m00 * m00, 2 * m00 * m01, m01 * m01,
        2 * m00 * m01, 2 * (m01 * m01 + m00 * m11), 2 * m01 * m11,
        m01 * m01, 2 * m01 * m11, m11 * m11;
    acc.noalias() -= 0.5 * V[k].transpose() * (K * V[k]);
  }
  return acc;
}

}  // namespace netfm
