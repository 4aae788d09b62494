#include "netfm/solver.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

namespace netfm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double objective(const Network& net, const Covariates& cov, const ModelSpec& spec, const Params& p, bool penalized) {
  const double ll = log_likelihood(net, cov, spec, p);
  if (!penalized) return ll;
  try {
    return ll + penalty_eta(net, cov, spec, p).eta;
  } catch (const PenaltyBoundaryError&) {
    return kNegInf;
  }
}

std::vector<int> nodes_beyond(const VectorXd& lambda, const ModelSpec& spec, double thr) {
  std::vector<int> out;
  if (spec.variant == Variant::Undirected) {
    for (int i = 0; i < lambda.size(); ++i)
      if (std::abs(lambda(i)) > thr) out.push_back(i);
    return out;
  }
  for (int i = 0; 2 * i + 1 < lambda.size(); ++i)
    if (std::abs(lambda(2 * i)) > thr || std::abs(lambda(2 * i + 1)) > thr) out.push_back(i);
  return out;
}

// Preconditioned CG on A x = b with the hybrid inverse as preconditioner.
VectorXd pcg_solve(const MatrixXd& A, const VectorXd& b, const HybridInverse& S, double tol, int max_iter) {
  VectorXd x = VectorXd::Zero(b.size());
  VectorXd r = b;
  VectorXd z = S.apply(r);
  VectorXd p = z;
  double rz = r.dot(z);
  for (int it = 0; it < max_iter; ++it) {
    if (r.lpNorm<Eigen::Infinity>() <= tol) break;
    const VectorXd Ap = A * p;
    const double alpha = rz / p.dot(Ap);
    x += alpha * p;
    r -= alpha * Ap;
    z = S.apply(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  return x;
}

}  // namespace

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::MLE: return "MLE";
    case Estimator::PL: return "PL";
    case Estimator::EC: return "EC";
  }
  return "?";
}

HybridInverse::HybridInverse(const HessianParts& H) : H_(&H) {
  const bool undirected = H.spec.variant == Variant::Undirected;
  rank_ = undirected ? 1 : 2;
  blocks_inv_.resize(H.blocks.size(), Eigen::Matrix2d::Zero());
  for (std::size_t i = 0; i < H.blocks.size(); ++i) {
    if (undirected) {
      const double d = H.blocks[i](0, 0);
      if (!(d > 0)) throw std::runtime_error("HybridInverse: singular D block");
      blocks_inv_[i](0, 0) = 1.0 / d;
      continue;
    }
    const double det = H.blocks[i].determinant();
    if (!(det > 0)) throw std::runtime_error("HybridInverse: singular D block");
    blocks_inv_[i] = H.blocks[i].inverse();
  }
  const int dl = H.spec.dim_lambda(H.n);
  VectorXd uplus = VectorXd::Ones(dl);
  VectorXd uminus = VectorXd::Ones(dl);
  if (!undirected)
    for (int k = 1; k < dl; k += 2) uminus(k) = -1.0;
  const VectorXd wplus = neg_hll_apply(H, uplus);
  core_ = Eigen::Matrix2d::Zero();
  core_(0, 0) = uplus.dot(wplus);
  if (!undirected) {
    const VectorXd wminus = neg_hll_apply(H, uminus);
    core_(0, 1) = uplus.dot(wminus);
    core_(1, 0) = uminus.dot(wplus);
    core_(1, 1) = uminus.dot(wminus);
    if (!(std::abs(core_.determinant()) > 0)) throw std::runtime_error("HybridInverse: singular core matrix");
    core_inv_ = core_.inverse();
  } else {
    if (!(core_(0, 0) > 0)) throw std::runtime_error("HybridInverse: singular core matrix");
    core_inv_ = Eigen::Matrix2d::Zero();
    core_inv_(0, 0) = 1.0 / core_(0, 0);
  }
}

VectorXd HybridInverse::neg_hll_apply(const HessianParts& H, const VectorXd& v) {
  const bool undirected = H.spec.variant == Variant::Undirected;
  VectorXd out = VectorXd::Zero(v.size());
  if (undirected) {
    for (std::size_t i = 0; i < H.blocks.size(); ++i) out(i) = H.blocks[i](0, 0) * v(i);
    for (const auto& [dyad, c] : H.dyad_cov) {
      out(dyad.first) += c(0, 0) * v(dyad.second);
      out(dyad.second) += c(0, 0) * v(dyad.first);
    }
    return out;
  }
  for (std::size_t i = 0; i < H.blocks.size(); ++i)
    out.segment<2>(2 * i) = H.blocks[i] * v.segment<2>(2 * i);
  for (const auto& [dyad, c] : H.dyad_cov) {
    const int a = dyad.first, b = dyad.second;
    Eigen::Matrix2d cross;  // rows (alpha_a, gamma_a) x cols (alpha_b, gamma_b)
    cross << c(0, 1), c(0, 0), c(1, 1), c(0, 1);
    out.segment<2>(2 * a) += cross * v.segment<2>(2 * b);
    out.segment<2>(2 * b) += cross.transpose() * v.segment<2>(2 * a);
  }
  return out;
}

VectorXd HybridInverse::apply(const VectorXd& f) const {
  const bool undirected = H_->spec.variant == Variant::Undirected;
  VectorXd out(f.size());
  if (undirected) {
    for (Eigen::Index i = 0; i < f.size(); ++i) out(i) = blocks_inv_[i](0, 0) * f(i);
    const double uf = f.sum();
    out.array() += core_inv_(0, 0) * uf;
    return out;
  }
  for (std::size_t i = 0; i < blocks_inv_.size(); ++i)
    out.segment<2>(2 * i) = blocks_inv_[i] * f.segment<2>(2 * i);
  double fplus = 0.0, fminus = 0.0;
  for (Eigen::Index k = 0; k < f.size(); k += 2) {
    fplus += f(k) + f(k + 1);
    fminus += f(k) - f(k + 1);
  }
  const Eigen::Vector2d w = core_inv_ * Eigen::Vector2d(fplus, fminus);
  for (Eigen::Index k = 0; k < f.size(); k += 2) {
    out(k) += w(0) + w(1);
    out(k + 1) += w(0) - w(1);
  }
  return out;
}

MatrixXd information_matrix(const HessianParts& H) {
  const double N = static_cast<double>(H.n) * (H.n - 1);
  const HybridInverse S(H);
  MatrixXd SHlt(H.H_tl.cols(), H.H_tl.rows());
  for (Eigen::Index k = 0; k < H.H_tl.rows(); ++k) SHlt.col(k) = S.apply(H.H_tl.row(k).transpose());
  return -(H.H_tt + H.H_tl * SHlt) / N;
}

InnerResult inner_newton_lambda(const Network& net, const Covariates& cov, const ModelSpec& spec,
                                const VectorXd& theta, const VectorXd& lambda0, bool penalized,
                                const SolveOptions& opts) {
  const int n = net.n();
  const double tol = opts.inner_tol_scale * std::max(1, n);
  InnerResult res;
  res.lambda = lambda0;
  Params p = Params::from_theta_lambda(spec, theta, lambda0);
  double f = objective(net, cov, spec, p, penalized);
  if (f == kNegInf) {
    // Warm start beyond the penalty boundary: restart from the interior.
    res.lambda.setZero();
    p.lambda = res.lambda;
    f = objective(net, cov, spec, p, penalized);
  }
  if (f == kNegInf) {
    // Boundary even at lambda = 0: theta itself is beyond the penalty domain.
    // Report -inf so the caller's line search rejects this theta.
    res.objective = kNegInf;
    return res;
  }
  for (int it = 0; it < opts.max_inner; ++it) {
    p.lambda = res.lambda;
    const Score sc = score(net, cov, spec, p);
    VectorXd g = sc.g_lambda;
    if (penalized) g += penalty_grad(net, cov, spec, p).d_lambda;
    if (!g.allFinite()) {
      res.objective = f;
      res.iterations = it;
      return res;
    }
    if (g.lpNorm<Eigen::Infinity>() <= tol) {
      res.converged = true;
      res.objective = f;
      res.iterations = it;
      return res;
    }
    if (!penalized) {
      auto beyond = nodes_beyond(res.lambda, spec, opts.diverge_threshold);
      if (!beyond.empty()) {
        res.existence.exists = false;
        res.existence.diverged_nodes = std::move(beyond);
        res.objective = f;
        res.iterations = it;
        return res;
      }
    }
    const HessianParts H = hessian_parts(net, cov, spec, p);
    MatrixXd A = H.neg_Hll_dense();
    if (penalized) A -= penalty_hess_lambda(net, cov, spec, p);
    VectorXd step;
    double mu = 0.0;
    for (int tries = 0; tries < 40; ++tries) {
      MatrixXd Areg = A;
      if (mu > 0) Areg.diagonal().array() += mu;
      if (opts.use_iterative && !penalized && mu == 0.0) {
        step = pcg_solve(Areg, g, HybridInverse(H), tol * 1e-3, 4 * static_cast<int>(g.size()));
      } else {
        Eigen::LDLT<MatrixXd> ldlt(Areg);
        if (ldlt.info() != Eigen::Success) {
          mu = mu == 0.0 ? 1e-8 : mu * 10;
          continue;
        }
        step = ldlt.solve(g);
      }
      if (step.size() == g.size() && step.allFinite() && step.dot(g) > 0) break;
      step.resize(0);
      mu = mu == 0.0 ? 1e-8 : mu * 10;
    }
    if (step.size() != g.size()) {
      // No usable ascent direction; report the current point.
      res.objective = f;
      res.iterations = it;
      return res;
    }
    const double slope = step.dot(g);
    double t = 1.0;
    double f_new = kNegInf;
    VectorXd lam_new;
    while (t > 1e-14) {
      lam_new = res.lambda + t * step;
      p.lambda = lam_new;
      f_new = objective(net, cov, spec, p, penalized);
      if (f_new > f + opts.armijo * t * slope) break;
      t *= 0.5;
    }
    if (t <= 1e-14 || !(f_new > f)) {
      // No further progress possible from this point.
      res.objective = f;
      res.iterations = it;
      return res;
    }
    res.lambda = lam_new;
    f = f_new;
  }
  res.objective = f;
  res.iterations = opts.max_inner;
  if (!penalized) {
    auto beyond = nodes_beyond(res.lambda, spec, opts.diverge_threshold);
    if (!beyond.empty()) {
      res.existence.exists = false;
      res.existence.diverged_nodes = std::move(beyond);
    }
  }
  return res;
}

namespace {

struct OuterEval {
  double obj = kNegInf;
  VectorXd grad;
  VectorXd lambda;
  bool inner_converged = false;
  ExistenceInfo existence;
};

// Concentrated objective Q(theta) = max_lambda [l (+ eta)], with warm-started
// inner solves. The gradient is the partial theta-score at (theta, lambda_hat)
// by the envelope property.
class Concentrated {
 public:
  Concentrated(const Network& net, const Covariates& cov, const ModelSpec& spec, bool penalized,
               const SolveOptions& opts)
      : net_(net), cov_(cov), spec_(spec), penalized_(penalized), opts_(opts) {
    lambda_warm_ = VectorXd::Zero(spec.dim_lambda(net.n()));
  }

  // Warm-starts from `lambda_warm_`, which the caller advances via commit()
  // only for accepted theta steps; rejected line-search trials must not
  // poison the warm start or the fitted (theta, lambda) pairing.
  OuterEval eval(const VectorXd& theta) {
    OuterEval out;
    InnerResult inner = inner_newton_lambda(net_, cov_, spec_, theta, lambda_warm_, penalized_, opts_);
    out.existence = inner.existence;
    if (!inner.existence.exists) return out;
    if (inner.objective == kNegInf) return out;  // theta beyond the penalty domain
    out.inner_converged = inner.converged;
    out.lambda = inner.lambda;
    Params p = Params::from_theta_lambda(spec_, theta, inner.lambda);
    out.obj = inner.objective;
    out.grad = score(net_, cov_, spec_, p).g_theta;
    if (penalized_) out.grad += penalty_grad(net_, cov_, spec_, p).d_theta;
    return out;
  }

  void commit(const OuterEval& accepted) { lambda_warm_ = accepted.lambda; }

 private:
  const Network& net_;
  const Covariates& cov_;
  const ModelSpec& spec_;
  bool penalized_;
  SolveOptions opts_;
  VectorXd lambda_warm_;
};

FitResult fit_nested(const Network& net, const Covariates& cov, const ModelSpec& spec, bool penalized,
                     const SolveOptions& opts) {
  spec.validate();
  const int n = net.n();
  const double N = static_cast<double>(n) * (n - 1);
  const double tol = opts.outer_tol_scale * std::max(1.0, N);
  FitResult fit;
  fit.spec = spec;
  fit.estimator = penalized ? Estimator::PL : Estimator::MLE;

  if (!penalized) {
    // Boundary degrees (zero or full) force the corresponding effect to
    // +-infinity, so the MLE cannot exist; detect this up front rather than
    // waiting for the score to vanish along the divergent path.
    const auto boundary = boundary_nodes(net);
    if (!boundary.empty()) {
      fit.existence.exists = false;
      for (const auto& [node, reason] : boundary)
        if (fit.existence.diverged_nodes.empty() || fit.existence.diverged_nodes.back() != node)
          fit.existence.diverged_nodes.push_back(node);
      return fit;
    }
  }

  Concentrated Q(net, cov, spec, penalized, opts);
  const int dt = spec.dim_theta();
  VectorXd theta = VectorXd::Zero(dt);
  OuterEval cur = Q.eval(theta);
  if (!cur.existence.exists) {
    fit.existence = cur.existence;
    return fit;
  }
  if (cur.obj == kNegInf) return fit;  // no interior point even at theta = 0
  Q.commit(cur);
  if (dt == 0) {
    fit.converged = cur.inner_converged;
  } else {
    MatrixXd Binv = MatrixXd::Identity(dt, dt) / std::max(1.0, 0.25 * N);  // inverse-Hessian seed
    for (int it = 0; it < opts.max_outer; ++it) {
      fit.trace.push_back({cur.obj, cur.grad.lpNorm<Eigen::Infinity>(), 0.0});
      if (cur.grad.lpNorm<Eigen::Infinity>() <= tol) {
        fit.converged = true;
        break;
      }
      VectorXd dir = Binv * cur.grad;  // ascent direction
      if (dir.dot(cur.grad) <= 0) dir = cur.grad / std::max(1.0, 0.25 * N);
      double t = 1.0;
      OuterEval next;
      VectorXd theta_new;
      const double slope = dir.dot(cur.grad);
      bool accepted = false;
      while (t > 1e-14) {
        theta_new = theta + t * dir;
        next = Q.eval(theta_new);
        if (!next.existence.exists) {
          fit.existence = next.existence;
          return fit;
        }
        if (next.obj > cur.obj + opts.armijo * t * slope) {
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (!accepted) break;
      const VectorXd s = theta_new - theta;
      const VectorXd y = next.grad - cur.grad;  // curvature of the concentrated score
      const double sy = s.dot(y);
      if (sy < 0) {
        // BFGS update on the inverse Hessian of -Q (maximization: y flips sign).
        const VectorXd ym = -y;
        const double sym = s.dot(ym);
        const MatrixXd I = MatrixXd::Identity(dt, dt);
        const MatrixXd V = I - s * ym.transpose() / sym;
        Binv = V * Binv * V.transpose() + s * s.transpose() / sym;
      }
      fit.trace.back().step = t;
      theta = theta_new;
      cur = next;
      Q.commit(cur);
    }
  }
  fit.theta_hat = theta;
  fit.lambda_hat = cur.lambda;
  Params p = Params::from_theta_lambda(spec, theta, fit.lambda_hat);
  fit.loglik = log_likelihood(net, cov, spec, p);
  if (penalized) fit.penalized_obj = fit.loglik + penalty_eta(net, cov, spec, p).eta;
  fit.info_matrix = information_matrix(hessian_parts(net, cov, spec, p));
  return fit;
}

}  // namespace

FitResult fit_mle(const Network& net, const Covariates& cov, const ModelSpec& spec, const SolveOptions& opts) {
  FitResult fit = fit_nested(net, cov, spec, /*penalized=*/false, opts);
  if (!fit.existence.exists && opts.trim_on_nonexistence) {
    auto [trimmed, trace] = trim_iteratively(net);
    if (trimmed.n() >= 2 && trimmed.n() < net.n()) {
      SolveOptions sub_opts = opts;
      sub_opts.trim_on_nonexistence = false;
      FitResult sub = fit_mle(trimmed, subcovariates(cov, trace.surviving), spec, sub_opts);
      sub.existence.trimmed_sample = trace;
      return sub;
    }
    fit.existence.trimmed_sample = trace;
  }
  return fit;
}

FitResult fit_pl(const Network& net, const Covariates& cov, const ModelSpec& spec, const SolveOptions& opts) {
  return fit_nested(net, cov, spec, /*penalized=*/true, opts);
}

FitResult fit_ec(const Network& net, const Covariates& cov, const ModelSpec& spec, const SolveOptions& opts) {
  return ec_from_mle(fit_mle(net, cov, spec, opts), net, cov, spec);
}

FitResult ec_from_mle(const FitResult& mle_fit, const Network& net, const Covariates& cov, const ModelSpec& spec) {
  FitResult fit = mle_fit;
  fit.estimator = Estimator::EC;
  if (!fit.existence.exists || !fit.converged) return fit;
  const int n = net.n();
  const double N = static_cast<double>(n) * (n - 1);
  Params p = Params::from_theta_lambda(spec, fit.theta_hat, fit.lambda_hat);
  const HessianParts H = hessian_parts(net, cov, spec, p);
  const PenaltyGrad pg = penalty_grad(net, cov, spec, p);
  // Concentrated penalty score: d eta/d theta along lambda_hat(theta).
  const MatrixXd negHll = H.neg_Hll_dense();
  const VectorXd v = Eigen::LDLT<MatrixXd>(negHll).solve(pg.d_lambda);
  const VectorXd h = pg.d_theta + H.H_tl * v;
  // Normalization pinned by first-order agreement with the PL shift.
  fit.bias_hat = -h * (n - 1) / N;
  fit.theta_hat -= Eigen::LDLT<MatrixXd>(fit.info_matrix).solve(fit.bias_hat) / (n - 1);
  Params pec = Params::from_theta_lambda(spec, fit.theta_hat, fit.lambda_hat);
  fit.loglik = log_likelihood(net, cov, spec, pec);
  fit.info_matrix = information_matrix(hessian_parts(net, cov, spec, pec));
  return fit;
}

}  // namespace netfm
