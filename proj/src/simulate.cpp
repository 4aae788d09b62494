#include "netfm/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace netfm {

McDesign McDesign::by_id(const std::string& id, Variant variant, int n) {
  McDesign d;
  d.design_id = id;
  d.variant = variant;
  d.n = n;
  if (id == "A1") {
    d.rho_L = d.rho_H = -0.5;
  } else if (id == "A2") {
    d.rho_L = d.rho_H = -1.0;
  } else if (id == "A3") {
    d.rho_L = d.rho_H = -2.0;
  } else if (id == "B1") {
    d.rho_L = -2.0 / 3.0;
    d.rho_H = -1.0 / 6.0;
  } else if (id == "B2") {
    d.rho_L = -7.0 / 6.0;
    d.rho_H = -2.0 / 3.0;
  } else if (id == "B3") {
    d.rho_L = -13.0 / 6.0;
    d.rho_H = -5.0 / 3.0;
  } else {
    throw std::invalid_argument("unknown design id: " + id);
  }
  if (id[0] == 'B') {
    d.varpi0 = 0.25;
    d.varpi1 = 0.75;
  }
  return d;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::mt19937_64 rep_stream(std::uint64_t seed, std::uint64_t rep) {
  std::uint64_t s = seed ^ (0xd1b54a32d192ed03ULL * (rep + 1));
  const std::uint64_t a = splitmix64(s), b = splitmix64(s);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

namespace {

// Uniform in (0,1), reproducible across standard library implementations.
double unit_open(std::mt19937_64& rng) { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53; }

}  // namespace

double draw_logistic(std::mt19937_64& rng) {
  const double u = unit_open(rng);
  return std::log(u / (1.0 - u));
}

// Johnk's method; efficient for the small shape parameters used here.
double draw_beta(std::mt19937_64& rng, double a, double b) {
  for (;;) {
    const double x = std::pow(unit_open(rng), 1.0 / a);
    const double y = std::pow(unit_open(rng), 1.0 / b);
    if (x + y <= 1.0 && x + y > 0.0) return x / (x + y);
  }
}

DgpDraw draw_dgp(const McDesign& design, std::mt19937_64& rng) {
  const int n = design.n;
  DgpDraw out;
  out.spec.variant = design.variant;
  out.spec.dim_beta = design.variant == Variant::Undirected ? 0 : 2;
  out.spec.dim_rho = design.variant == Variant::DirectedNoRecip ? 0 : 2;

  VectorXd ztil(n);
  out.alpha_raw = VectorXd(n);
  out.gamma_raw = VectorXd(n);
  const double beta_mean = design.varpi0 / (design.varpi0 + design.varpi1);
  for (int i = 0; i < n; ++i) {
    ztil(i) = (rng() & 1) ? 1.0 : -1.0;
    const double level = ztil(i) < 0 ? design.rho_L : design.rho_H;
    out.alpha_raw(i) = level + draw_beta(rng, design.varpi0, design.varpi1) - beta_mean;
    out.gamma_raw(i) = level + draw_beta(rng, design.varpi0, design.varpi1) - beta_mean;
  }

  const int dim_x = out.spec.dim_beta, dim_z = out.spec.dim_rho;
  out.cov = Covariates(n, dim_x, dim_z);
  if (dim_x > 0) out.cov.x_names = std::vector<std::string>{"const", "x"};
  if (dim_z > 0) out.cov.z_names = std::vector<std::string>{"zconst", "z"};
  VectorXd xv(2), zv(2);
  xv(0) = zv(0) = 1.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (dim_x > 0) {
        xv(1) = static_cast<double>(rng() & 1);
        out.cov.set_x(i, j, xv);
        xv(1) = static_cast<double>(rng() & 1);
        out.cov.set_x(j, i, xv);
      }
      if (dim_z > 0) {
        zv(1) = ztil(i) * ztil(j);
        out.cov.set_z(i, j, zv);
      }
    }

  // Normalized representation: alpha_n = gamma_n = 0, the removed levels
  // absorbed by the intercept columns.
  if (design.variant == Variant::Undirected) {
    out.true_params.beta = VectorXd(0);
    out.true_params.rho = VectorXd(2);
    out.true_params.rho << 2.0 * out.alpha_raw(n - 1), design.rho0;
    out.true_params.lambda = VectorXd(n - 1);
    for (int i = 0; i < n - 1; ++i) out.true_params.lambda(i) = out.alpha_raw(i) - out.alpha_raw(n - 1);
  } else {
    const double kappa = out.alpha_raw(n - 1) + out.gamma_raw(n - 1);
    out.true_params.beta = VectorXd(2);
    out.true_params.beta << kappa, design.beta0;
    out.true_params.rho = VectorXd(out.spec.dim_rho);
    if (out.spec.dim_rho > 0) out.true_params.rho << 0.0, design.rho0;
    out.true_params.lambda = VectorXd(2 * (n - 1));
    for (int i = 0; i < n - 1; ++i) {
      out.true_params.lambda(2 * i) = out.alpha_raw(i) - out.alpha_raw(n - 1);
      out.true_params.lambda(2 * i + 1) = out.gamma_raw(i) - out.gamma_raw(n - 1);
    }
  }
  return out;
}

Network simulate_network(const DgpDraw& draw, const McDesign& design, std::mt19937_64& rng) {
  const int n = draw.cov.n();
  Network net(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const DyadIndices idx = dyad_indices(draw.true_params, draw.cov, draw.spec, i, j);
      if (design.variant == Variant::Undirected) {
        const bool g = idx.B_ij >= draw_logistic(rng);
        net.set_edge(i, j, g);
        net.set_edge(j, i, g);
        continue;
      }
      if (design.variant == Variant::DirectedNoRecip) {
        net.set_edge(i, j, idx.B_ij >= draw_logistic(rng));
        net.set_edge(j, i, idx.B_ji >= draw_logistic(rng));
        continue;
      }
      // Stochastic best response within the dyad, fresh taste shock each move.
      bool gij = false, gji = false;
      for (int r = 0; r < design.rounds; ++r) {
        bool ij_first = true;
        if (design.random_order) ij_first = (rng() & 1) != 0;
        for (int m = 0; m < 2; ++m) {
          const bool move_ij = (m == 0) == ij_first;
          if (move_ij)
            gij = idx.B_ij + (gji ? idx.C_ij : 0.0) >= draw_logistic(rng);
          else
            gji = idx.B_ji + (gij ? idx.C_ij : 0.0) >= draw_logistic(rng);
        }
      }
      net.set_edge(i, j, gij);
      net.set_edge(j, i, gji);
    }
  return net;
}

namespace {

struct RepEst {
  bool ok = false;
  std::vector<double> val, se;          // reported slope coefficients
  std::vector<double> ape_val, ape_se;  // per APE target
};

struct RepRecord {
  double density = 0, recip = 0, transitivity = 0;
  bool has_trans = false;
  bool mle_exists = false, mle_attempted = false;
  std::vector<RepEst> est;       // aligned with requested estimators
  std::vector<double> true_ape;  // per target, at the true parameters
};

struct CellAcc {
  std::string name;
  std::vector<double> bias;
  double true_sum = 0, cover = 0;
  int used = 0;

  void add(double value, double se, double truth) {
    bias.push_back(value - truth);
    true_sum += truth;
    if (std::abs(value - truth) <= 1.959963985 * se) cover += 1.0;
    ++used;
  }
  McCell finish() const {
    McCell c;
    c.name = name;
    c.n_used = used;
    if (used == 0) return c;
    std::vector<double> b = bias;
    std::sort(b.begin(), b.end());
    c.median_bias = used % 2 ? b[used / 2] : 0.5 * (b[used / 2 - 1] + b[used / 2]);
    double mean = 0;
    for (double v : b) mean += v;
    mean /= used;
    double ss = 0;
    for (double v : b) ss += (v - mean) * (v - mean);
    c.sd = used > 1 ? std::sqrt(ss / (used - 1)) : 0.0;
    c.coverage = cover / used;
    c.true_value = true_sum / used;
    return c;
  }
};

std::vector<std::pair<std::string, int>> reported_slopes(const ModelSpec& spec) {
  // Theta index of each slope (intercepts are nuisance columns).
  if (spec.variant == Variant::Reciprocal) return {{"beta", 1}, {"rho", spec.dim_beta + 1}};
  if (spec.variant == Variant::DirectedNoRecip) return {{"beta", 1}};
  return {{"rho", 1}};
}

}  // namespace

McSummary run_mc(const McDesign& design, int reps, const std::vector<Estimator>& estimators,
                 const std::vector<ApeSpec>& ape_targets, const SolveOptions& opts, int threads) {
  if (reps < 1) throw std::invalid_argument("run_mc: reps must be >= 1");
  std::vector<RepRecord> records(reps);

  const bool want_mle = std::count(estimators.begin(), estimators.end(), Estimator::MLE) > 0;
  const bool want_ec = std::count(estimators.begin(), estimators.end(), Estimator::EC) > 0;

  auto run_rep = [&](int rep) {
    RepRecord& rec = records[rep];
    rec.est.assign(estimators.size(), RepEst{});
    std::mt19937_64 rng = rep_stream(design.seed, static_cast<std::uint64_t>(rep));
    const DgpDraw draw = draw_dgp(design, rng);
    const Network net = simulate_network(draw, design, rng);
    const NetworkStats stats = network_stats(net);
    rec.density = stats.density;
    rec.recip = stats.reciprocity_share;
    rec.has_trans = stats.transitivity.has_value();
    rec.transitivity = stats.transitivity.value_or(0.0);

    std::vector<ApeTarget> targets;
    for (const auto& t : ape_targets) targets.push_back(resolve_ape_target(draw.cov, draw.spec, t.name, t.kind));
    for (const auto& t : targets) rec.true_ape.push_back(ape_at(draw.true_params, draw.cov, draw.spec, t));

    FitResult mle_fit;
    bool have_mle = false;
    auto fit_for = [&](Estimator e) -> FitResult {
      if (e == Estimator::PL) return fit_pl(net, draw.cov, draw.spec, opts);
      if (!have_mle) {
        mle_fit = fit_mle(net, draw.cov, draw.spec, opts);
        have_mle = true;
      }
      if (e == Estimator::MLE) return mle_fit;
      return ec_from_mle(mle_fit, net, draw.cov, draw.spec);
    };

    const auto slopes = reported_slopes(draw.spec);
    for (std::size_t k = 0; k < estimators.size(); ++k) {
      FitResult fit;
      try {
        fit = fit_for(estimators[k]);
      } catch (const std::exception&) {
        continue;  // recorded as a failed replication for this estimator
      }
      if (estimators[k] != Estimator::PL) {
        rec.mle_attempted = true;
        rec.mle_exists = rec.mle_exists || fit.existence.exists;
      }
      if (!fit.converged || !fit.existence.exists) continue;
      RepEst& re = rec.est[k];
      try {
        const MatrixXd cov_theta = theta_covariance(fit);
        for (const auto& [name, idx] : slopes) {
          re.val.push_back(fit.theta_hat(idx));
          re.se.push_back(std::sqrt(std::max(0.0, cov_theta(idx, idx))));
        }
        for (const auto& t : targets) {
          const ApeResult ar = ape_corrected(fit, net, draw.cov, draw.spec, t);
          // Plug-in point for MLE/EC fits; trace-corrected point for PL.
          re.ape_val.push_back(estimators[k] == Estimator::PL ? ar.delta_corrected : ar.delta_plugin);
          re.ape_se.push_back(ar.std_error);
        }
        re.ok = true;
      } catch (const std::exception&) {
        re = RepEst{};
      }
    }
  };

  threads = std::max(1, threads);
  if (threads == 1) {
    for (int rep = 0; rep < reps; ++rep) run_rep(rep);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (int rep = t; rep < reps; rep += threads) run_rep(rep);
      });
    for (auto& th : pool) th.join();
  }

  McSummary out;
  out.design = design;
  out.reps = reps;
  int trans_n = 0, mle_attempts = 0, mle_ok = 0;
  for (const auto& rec : records) {
    out.mean_density += rec.density / reps;
    out.mean_reciprocity += rec.recip / reps;
    if (rec.has_trans) {
      out.mean_transitivity += rec.transitivity;
      ++trans_n;
    }
    if (rec.mle_attempted) {
      ++mle_attempts;
      if (rec.mle_exists) ++mle_ok;
    }
  }
  out.mean_transitivity = trans_n > 0 ? out.mean_transitivity / trans_n : 0.0;
  out.mle_success_rate = mle_attempts > 0 ? static_cast<double>(mle_ok) / mle_attempts : 0.0;
  if (!want_mle && !want_ec) out.mle_success_rate = 1.0;

  ModelSpec spec;
  spec.variant = design.variant;
  spec.dim_beta = design.variant == Variant::Undirected ? 0 : 2;
  spec.dim_rho = design.variant == Variant::DirectedNoRecip ? 0 : 2;
  const auto slopes = reported_slopes(spec);

  for (std::size_t k = 0; k < estimators.size(); ++k) {
    McEstimatorSummary es;
    es.estimator = estimators[k];
    es.attempts = reps;
    std::vector<CellAcc> coef_acc(slopes.size()), ape_acc(ape_targets.size());
    for (std::size_t c = 0; c < slopes.size(); ++c) coef_acc[c].name = slopes[c].first;
    for (std::size_t a = 0; a < ape_targets.size(); ++a) ape_acc[a].name = ape_targets[a].name;
    for (const auto& rec : records) {
      const RepEst& re = rec.est[k];
      if (!re.ok) continue;
      ++es.successes;
      for (std::size_t c = 0; c < slopes.size(); ++c) {
        const double truth = slopes[c].first == "beta" ? design.beta0 : design.rho0;
        coef_acc[c].add(re.val[c], re.se[c], truth);
      }
      for (std::size_t a = 0; a < ape_targets.size(); ++a) ape_acc[a].add(re.ape_val[a], re.ape_se[a], rec.true_ape[a]);
    }
    for (auto& c : coef_acc) es.coef.push_back(c.finish());
    for (auto& a : ape_acc) es.ape.push_back(a.finish());
    out.estimators.push_back(std::move(es));
  }
  return out;
}

}  // namespace netfm
