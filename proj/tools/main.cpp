#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "netfm/io.hpp"
#include "netfm/simulate.hpp"

namespace fs = std::filesystem;
using namespace netfm;

namespace {

struct RunConfig {
  std::string command;
  std::string variant = "reciprocal";
  std::vector<std::string> estimators{"pl"};
  std::string edges, x_cov, z_cov, labels;
  std::vector<std::string> apes;  // name:kind
  std::string design = "A1";
  int n = 100;
  int reps = 100;
  std::uint64_t seed = 1;
  int rounds = 1000;
  std::string out_dir;
  int threads = 1;
  bool trim = false;
  double tol = 1e-6;
  int max_iter = 200;
  double diverge_threshold = 30.0;
};

Variant parse_variant(const std::string& s) {
  if (s == "reciprocal") return Variant::Reciprocal;
  if (s == "norecip") return Variant::DirectedNoRecip;
  if (s == "undirected") return Variant::Undirected;
  throw CLI::ValidationError("--variant", "expected reciprocal|norecip|undirected");
}

Estimator parse_estimator(const std::string& s) {
  if (s == "mle") return Estimator::MLE;
  if (s == "pl") return Estimator::PL;
  if (s == "ec") return Estimator::EC;
  throw CLI::ValidationError("--estimator", "expected mle|pl|ec");
}

ApeSpec parse_ape(const std::string& s) {
  const auto pos = s.rfind(':');
  if (pos == std::string::npos) throw CLI::ValidationError("--ape", "expected name:continuous or name:binary");
  ApeSpec a;
  a.name = s.substr(0, pos);
  const std::string kind = s.substr(pos + 1);
  if (kind == "continuous")
    a.kind = ApeKind::Continuous;
  else if (kind == "binary")
    a.kind = ApeKind::Binary;
  else
    throw CLI::ValidationError("--ape", "kind must be continuous or binary");
  return a;
}

std::ofstream out_file(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  std::ofstream f(fs::path(cfg.out_dir) / name);
  if (!f) throw std::runtime_error("cannot write " + name + " in " + cfg.out_dir);
  return f;
}

SolveOptions solve_options(const RunConfig& cfg) {
  SolveOptions opts;
  opts.outer_tol_scale = cfg.tol;
  opts.max_outer = cfg.max_iter;
  opts.diverge_threshold = cfg.diverge_threshold;
  opts.trim_on_nonexistence = cfg.trim;
  return opts;
}

std::string node_name(const Network& net, int i) {
  if (net.node_labels && i < static_cast<int>(net.node_labels->size())) return (*net.node_labels)[i];
  return std::to_string(i);
}

void print_existence(std::ostream& os, const Network& net, const FitResult& fit) {
  os << "existence: " << (fit.existence.exists ? "ok" : "nonexistent (boundary MLE)") << '\n';
  if (!fit.existence.diverged_nodes.empty()) {
    os << "diverged nodes:";
    for (int v : fit.existence.diverged_nodes) os << ' ' << node_name(net, v);
    os << '\n';
  }
  if (fit.existence.trimmed_sample) {
    const TrimTrace& tr = *fit.existence.trimmed_sample;
    os << "trim cascade (" << tr.rounds.size() << " rounds):\n";
    for (std::size_t r = 0; r < tr.rounds.size(); ++r) {
      os << "  round " << r + 1 << ":";
      for (const auto& [v, why] : tr.rounds[r].removed) os << ' ' << node_name(net, v) << '(' << to_string(why) << ')';
      os << '\n';
    }
    os << "  surviving nodes: " << tr.surviving.size() << '\n';
  }
}

int cmd_estimate(const RunConfig& cfg) {
  const Variant variant = parse_variant(cfg.variant);
  if (cfg.edges.empty()) throw CLI::ValidationError("--edges", "required for estimate");

  DyadTable xt, zt;
  const bool has_x = !cfg.x_cov.empty(), has_z = !cfg.z_cov.empty();
  if (variant == Variant::Undirected && has_x)
    throw CLI::ValidationError("--x-cov", "undirected variant takes no X covariates");
  if (variant != Variant::DirectedNoRecip && !has_z)
    throw CLI::ValidationError("--z-cov", "Z covariates required for this variant");
  if (variant != Variant::Undirected && !has_x)
    throw CLI::ValidationError("--x-cov", "X covariates required for this variant");
  if (variant == Variant::DirectedNoRecip && has_z)
    throw CLI::ValidationError("--z-cov", "norecip variant takes no Z covariates");
  if (has_x) xt = read_dyad_table(cfg.x_cov);
  if (has_z) zt = read_dyad_table(cfg.z_cov);
  Covariates cov = combine_covariates(has_x ? &xt : nullptr, has_z ? &zt : nullptr);

  const auto edge_pairs = read_edge_list(cfg.edges);
  Network net = build_network(cov.n(), edge_pairs);
  if (!cfg.labels.empty()) net.node_labels = read_labels(cfg.labels);

  ModelSpec spec;
  spec.variant = variant;
  spec.dim_beta = cov.dim_x();
  spec.dim_rho = cov.dim_z();
  spec.validate();

  std::vector<ApeSpec> apes;
  for (const auto& s : cfg.apes) apes.push_back(parse_ape(s));
  const SolveOptions opts = solve_options(cfg);

  std::ofstream coef_csv = out_file(cfg, "coefficients.csv");
  std::ofstream ape_csv = out_file(cfg, "ape.csv");
  std::ofstream fit_csv = out_file(cfg, "fit.csv");
  coef_csv << "estimator,name,estimate,std_error\n";
  ape_csv << "estimator,target,kind,plugin,corrected,trace_correction,std_error\n";
  fit_csv << "estimator,converged,exists,loglik,penalized_objective,iterations\n";

  std::vector<std::string> names;
  if (cov.x_names) names.insert(names.end(), cov.x_names->begin(), cov.x_names->end());
  if (cov.z_names) names.insert(names.end(), cov.z_names->begin(), cov.z_names->end());

  const NetworkStats stats = network_stats(net);
  std::cout << "n=" << net.n() << " density=" << fmt9(stats.density)
            << " reciprocity=" << fmt9(stats.reciprocity_share) << '\n';
  const auto boundary = boundary_nodes(net);
  if (!boundary.empty()) {
    std::cout << "boundary nodes (" << boundary.size() << "):";
    for (const auto& [v, why] : boundary) std::cout << ' ' << node_name(net, v) << '(' << to_string(why) << ')';
    std::cout << '\n';
  }

  for (const auto& es : cfg.estimators) {
    const Estimator est = parse_estimator(es);
    FitResult fit;
    switch (est) {
      case Estimator::MLE: fit = fit_mle(net, cov, spec, opts); break;
      case Estimator::PL: fit = fit_pl(net, cov, spec, opts); break;
      case Estimator::EC: fit = fit_ec(net, cov, spec, opts); break;
    }
    fit_csv << to_string(est) << ',' << fit.converged << ',' << fit.existence.exists << ','
            << fmt9(fit.loglik) << ',' << fmt9(fit.penalized_obj) << ',' << fit.trace.size() << '\n';
    std::cout << "\n[" << to_string(est) << "]\n";
    print_existence(std::cout, net, fit);
    if (!fit.existence.exists || !fit.converged) {
      std::cout << "estimates: n.a. ("
                << (fit.existence.exists ? "did not converge" : "NonExistence") << ")\n";
      for (const auto& nm : names) coef_csv << to_string(est) << ',' << nm << ",n.a.,n.a.\n";
      for (const auto& a : apes)
        ape_csv << to_string(est) << ',' << a.name << ','
                << (a.kind == ApeKind::Binary ? "binary" : "continuous") << ",n.a.,n.a.,n.a.,n.a.\n";
      continue;
    }
    const MatrixXd cov_theta = theta_covariance(fit);
    for (std::size_t k = 0; k < names.size(); ++k) {
      const double se = std::sqrt(std::max(0.0, cov_theta(k, k)));
      coef_csv << to_string(est) << ',' << names[k] << ',' << fmt9(fit.theta_hat(k)) << ',' << fmt9(se) << '\n';
      std::cout << "  " << names[k] << " = " << fmt9(fit.theta_hat(k)) << "  (se " << fmt9(se) << ")\n";
    }
    for (const auto& a : apes) {
      const ApeTarget tgt = resolve_ape_target(cov, spec, a.name, a.kind);
      const ApeResult ar = ape_corrected(fit, net, cov, spec, tgt);
      const std::string kind = a.kind == ApeKind::Binary ? "binary" : "continuous";
      const bool pl = est == Estimator::PL;
      ape_csv << to_string(est) << ',' << a.name << ',' << kind << ',' << fmt9(ar.delta_plugin) << ','
              << (pl ? fmt9(ar.delta_corrected) : std::string("n.a.")) << ','
              << (pl ? fmt9(ar.trace_correction) : std::string("n.a.")) << ',' << fmt9(ar.std_error) << '\n';
      std::cout << "  APE[" << a.name << "] plugin " << fmt9(ar.delta_plugin);
      if (pl) std::cout << "  corrected " << fmt9(ar.delta_corrected);
      std::cout << "  (se " << fmt9(ar.std_error) << ")\n";
    }
  }
  return 0;
}

int cmd_simulate(const RunConfig& cfg) {
  const Variant variant = parse_variant(cfg.variant);
  McDesign design = McDesign::by_id(cfg.design, variant, cfg.n);
  design.rounds = cfg.rounds;
  design.seed = cfg.seed;

  std::vector<Estimator> ests;
  for (const auto& s : cfg.estimators) ests.push_back(parse_estimator(s));
  std::vector<ApeSpec> apes;
  for (const auto& s : cfg.apes) apes.push_back(parse_ape(s));

  const McSummary sum = run_mc(design, cfg.reps, ests, apes, solve_options(cfg), cfg.threads);

  std::ofstream stats_csv = out_file(cfg, "network_stats.csv");
  stats_csv << "design,variant,n,reps,seed,density,reciprocity,transitivity,mle_success_rate\n";
  stats_csv << design.design_id << ',' << cfg.variant << ',' << cfg.n << ',' << cfg.reps << ',' << cfg.seed
            << ',' << fmt9(sum.mean_density) << ',' << fmt9(sum.mean_reciprocity) << ','
            << fmt9(sum.mean_transitivity) << ',' << fmt9(sum.mle_success_rate) << '\n';

  std::ofstream panel_csv = out_file(cfg, "panels.csv");
  panel_csv << "estimator,kind,name,true_value,median_bias,sd,coverage,n_used\n";
  std::cout << "design " << design.design_id << " (" << cfg.variant << ", n=" << cfg.n << ", reps=" << cfg.reps
            << ", seed=" << cfg.seed << ")\n";
  std::cout << "density " << fmt9(sum.mean_density) << "  transitivity " << fmt9(sum.mean_transitivity)
            << "  MLE success " << fmt9(sum.mle_success_rate) << '\n';
  for (const auto& es : sum.estimators) {
    std::cout << "[" << to_string(es.estimator) << "] successes " << es.successes << "/" << es.attempts << '\n';
    auto emit = [&](const std::string& kind, const McCell& c) {
      panel_csv << to_string(es.estimator) << ',' << kind << ',' << c.name << ',' << fmt9(c.true_value) << ','
                << fmt9(c.median_bias) << ',' << fmt9(c.sd) << ',' << fmt9(c.coverage) << ',' << c.n_used << '\n';
      std::cout << "  " << kind << ' ' << c.name << ": bias " << fmt9(c.median_bias) << "  sd " << fmt9(c.sd)
                << "  coverage " << fmt9(c.coverage) << '\n';
    };
    for (const auto& c : es.coef) emit("coef", c);
    for (const auto& c : es.ape) emit("ape", c);
  }
  return 0;
}

int cmd_diagnose(const RunConfig& cfg) {
  if (cfg.edges.empty()) throw CLI::ValidationError("--edges", "required for diagnose");
  const auto edge_pairs = read_edge_list(cfg.edges);
  int n = 0;
  for (const auto& [s, d] : edge_pairs) n = std::max(n, std::max(s, d) + 1);
  if (!cfg.labels.empty()) {
    const auto labels = read_labels(cfg.labels);
    n = std::max(n, static_cast<int>(labels.size()));
  }
  Network net = build_network(n, edge_pairs);
  if (!cfg.labels.empty()) net.node_labels = read_labels(cfg.labels);

  const NetworkStats stats = network_stats(net);
  const DegreeSequences deg = degrees(net);

  int null_d = 0, asym_d = 0, mut_d = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const int s = (net.edge(i, j) ? 1 : 0) + (net.edge(j, i) ? 1 : 0);
      (s == 0 ? null_d : s == 1 ? asym_d : mut_d)++;
    }
  const double dyads = n * (n - 1) / 2.0;

  std::cout << "nodes " << n << "  density " << fmt9(stats.density) << '\n';
  std::cout << "dyad states: null " << fmt9(null_d / dyads) << "  asymmetric " << fmt9(asym_d / dyads)
            << "  mutual " << fmt9(mut_d / dyads) << '\n';
  std::cout << "reciprocity share " << fmt9(stats.reciprocity_share) << "  independence benchmark "
            << fmt9(stats.density * stats.density) << '\n';
  if (stats.transitivity) std::cout << "transitivity " << fmt9(*stats.transitivity) << '\n';

  std::map<int, int> out_hist, in_hist;
  for (int i = 0; i < n; ++i) {
    out_hist[deg.d[i]]++;
    in_hist[deg.b[i]]++;
  }
  std::cout << "out-degree histogram:";
  for (const auto& [k, c] : out_hist) std::cout << ' ' << k << ':' << c;
  std::cout << "\nin-degree histogram:";
  for (const auto& [k, c] : in_hist) std::cout << ' ' << k << ':' << c;
  std::cout << '\n';

  const auto boundary = boundary_nodes(net);
  std::cout << "boundary nodes (" << boundary.size() << "):";
  for (const auto& [v, why] : boundary) std::cout << ' ' << node_name(net, v) << '(' << to_string(why) << ')';
  std::cout << '\n';
  const auto [trimmed, trace] = trim_iteratively(net);
  std::cout << "trim cascade: " << trace.rounds.size() << " rounds\n";
  for (std::size_t r = 0; r < trace.rounds.size(); ++r) {
    std::cout << "  round " << r + 1 << " removes " << trace.rounds[r].removed.size() << ":";
    for (const auto& [v, why] : trace.rounds[r].removed)
      std::cout << ' ' << node_name(net, v) << '(' << to_string(why) << ')';
    std::cout << '\n';
  }
  std::cout << "surviving nodes: " << trace.surviving.size() << '\n';

  if (!cfg.out_dir.empty()) {
    std::ofstream rep = out_file(cfg, "diagnose.csv");
    rep << "metric,value\n";
    rep << "nodes," << n << '\n';
    rep << "density," << fmt9(stats.density) << '\n';
    rep << "null_share," << fmt9(null_d / dyads) << '\n';
    rep << "asymmetric_share," << fmt9(asym_d / dyads) << '\n';
    rep << "mutual_share," << fmt9(mut_d / dyads) << '\n';
    rep << "reciprocity_share," << fmt9(stats.reciprocity_share) << '\n';
    rep << "independence_benchmark," << fmt9(stats.density * stats.density) << '\n';
    rep << "boundary_nodes," << boundary.size() << '\n';
    rep << "trim_rounds," << trace.rounds.size() << '\n';
    rep << "surviving_nodes," << trace.surviving.size() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dyadic network formation models with degree heterogeneity"};
  RunConfig cfg;
  cfg.out_dir = ".";

  app.set_config("--config");
  app.add_option("--command", cfg.command, "estimate|simulate|diagnose")->required();
  app.add_option("--variant", cfg.variant, "reciprocal|norecip|undirected");
  app.add_option("--estimator", cfg.estimators, "mle|pl|ec (repeatable)");
  app.add_option("--edges", cfg.edges, "edge list csv (src,dst)");
  app.add_option("--x-cov", cfg.x_cov, "ordered-pair covariate csv");
  app.add_option("--z-cov", cfg.z_cov, "unordered-pair covariate csv");
  app.add_option("--labels", cfg.labels, "node label csv (id,label)");
  app.add_option("--ape", cfg.apes, "APE target name:kind (repeatable)");
  app.add_option("--design", cfg.design, "A1|A2|A3|B1|B2|B3");
  app.add_option("--n", cfg.n, "network size for simulate");
  app.add_option("--reps", cfg.reps, "Monte Carlo replications");
  app.add_option("--seed", cfg.seed, "master seed");
  app.add_option("--rounds", cfg.rounds, "best-response rounds per dyad");
  app.add_option("--out-dir", cfg.out_dir, "output directory");
  app.add_option("--threads", cfg.threads, "worker threads for simulate");
  app.add_flag("--trim", cfg.trim, "retry MLE on the trimmed subnetwork on nonexistence");
  app.add_option("--tol", cfg.tol, "outer gradient tolerance scale");
  app.add_option("--max-iter", cfg.max_iter, "outer iteration cap");
  app.add_option("--diverge-threshold", cfg.diverge_threshold, "fixed-effect magnitude declaring nonexistence");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // help/version exit 0; bad usage exits 2
  }

  try {
    if (cfg.command == "estimate") return cmd_estimate(cfg);
    if (cfg.command == "simulate") return cmd_simulate(cfg);
    if (cfg.command == "diagnose") return cmd_diagnose(cfg);
    std::cerr << "unknown command: " << cfg.command << '\n';
    return 2;
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
