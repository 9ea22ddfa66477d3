#include "copoe/harness.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "copoe/errors.hpp"
#include "copoe/oracle_eval.hpp"
#include "copoe/rollout.hpp"
#include "copoe/solver.hpp"

namespace copoe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kRunChecks = {"potential", "switch_bound", "determinant_overshoot",
                                             "ratio_stability"};

class Reader {
 public:
  explicit Reader(const json& doc) : doc_(doc) {
    if (!doc_.is_object()) throw ConfigError("", "config must be a flat JSON object");
    const auto& keys = config_keys();
    for (const auto& [key, value] : doc_.items()) {
      if (std::find(keys.begin(), keys.end(), key) == keys.end())
        throw ConfigError(key, "unknown config key '" + key + "'");
      if (value.is_object()) throw ConfigError(key, "config key '" + key + "' must not be nested");
    }
  }

  bool has(const std::string& key) const { return doc_.contains(key) && !doc_.at(key).is_null(); }

  double real(const std::string& key) const {
    const json& v = doc_.at(key);
    if (!v.is_number()) throw ConfigError(key, "config key '" + key + "' must be a number");
    return v.get<double>();
  }

  long integer(const std::string& key) const {
    const json& v = doc_.at(key);
    if (v.is_number_integer()) return v.get<long>();
    if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>())
      return static_cast<long>(v.get<double>());
    throw ConfigError(key, "config key '" + key + "' must be an integer");
  }

  std::string text(const std::string& key) const {
    const json& v = doc_.at(key);
    if (!v.is_string()) throw ConfigError(key, "config key '" + key + "' must be a string");
    return v.get<std::string>();
  }

  bool flag(const std::string& key) const {
    const json& v = doc_.at(key);
    if (!v.is_boolean()) throw ConfigError(key, "config key '" + key + "' must be true or false");
    return v.get<bool>();
  }

  const json& raw(const std::string& key) const { return doc_.at(key); }

 private:
  const json& doc_;
};

[[noreturn]] void range_error(const std::string& key, const std::string& rule, const json& got) {
  throw ConfigError(key, "config key '" + key + "' out of range: requires " + rule + " (got " +
                             got.dump() + ")");
}

void record(json& eff, const std::string& key, const json& value, const std::string& source) {
  eff[key] = {{"value", value}, {"source", source}};
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json mixture_json(const LinearMdp& mdp, const MixturePolicy& mix) {
  json members = json::array();
  for (std::size_t i = 0; i < mix.size(); ++i) {
    const RowMatrix t = mix.members()[i]->to_table(mdp);
    json rows = json::array();
    for (Eigen::Index s = 0; s < t.rows(); ++s)
      rows.push_back(std::vector<double>(t.row(s).data(), t.row(s).data() + t.cols()));
    members.push_back({{"weight", mix.weights()[i]}, {"probs", std::move(rows)}});
  }
  return members;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "env",   "env_kind", "env_states", "env_actions", "env_dim", "env_horizon", "env_clusters",
      "env_seed", "N",     "K",          "eta",         "kappa",   "W",           "W_scale",
      "lambda", "beta",    "c_beta",     "gamma",       "delta",   "t_max",       "mc_multiplier",
      "seed",  "mode",     "repeat",     "seeds",       "out_dir", "checks",      "step_budget",
      "ratio_cap", "oracle"};
  return keys;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {
      "determinant_ratio", "inverse_fidelity", "npg_regret",        "policy_form",
      "is_unbiased",       "ratio_stability",  "one_sided",         "switch_bound",
      "potential",         "covariance_sandwich", "transfer_zero"};
  return names;
}

ExperimentSpec parse_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "config file not found: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.parent_path());
}

ExperimentSpec parse_config_text(const std::string& text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed config document: ") + e.what());
  }
  const Reader r(doc);
  ExperimentSpec spec;
  json& eff = spec.effective;
  EnvSpec& env = spec.env;

  if (r.has("env")) {
    fs::path p = r.text("env");
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    env.path = p.string();
    record(eff, "env", env.path, "config");
  }
  if (r.has("env_kind")) {
    env.kind = r.text("env_kind");
    if (env.kind != "random" && env.kind != "lock" && env.kind != "aggregated")
      range_error("env_kind", "one of random, lock, aggregated", env.kind);
  }
  auto int_key = [&](const std::string& key, long fallback, long lo, const std::string& rule) {
    const long v = r.has(key) ? r.integer(key) : fallback;
    if (v < lo) range_error(key, rule, v);
    return v;
  };
  env.states = static_cast<int>(int_key("env_states", env.states, 1, ">= 1"));
  env.actions = static_cast<int>(int_key("env_actions", env.actions, 1, ">= 1"));
  env.dim = static_cast<int>(int_key("env_dim", env.dim, 1, ">= 1"));
  env.horizon = static_cast<int>(int_key("env_horizon", env.horizon, 2, ">= 2"));
  env.clusters = static_cast<int>(int_key("env_clusters", env.clusters, 0, ">= 0"));
  env.seed = static_cast<std::uint64_t>(int_key("env_seed", 0, 0, ">= 0"));

  // gamma: config overrides the environment file
  double gamma = 0.9;
  std::string gamma_source = "default";
  if (r.has("gamma")) {
    gamma = r.real("gamma");
    if (!(gamma >= 0.0 && gamma < 1.0)) range_error("gamma", "0 <= gamma < 1", r.raw("gamma"));
    gamma_source = "config";
  } else if (!env.path.empty()) {
    gamma = read_mdp(env.path).gamma();
    gamma_source = "env file";
  }
  env.gamma = gamma;
  const LinearMdp mdp = build_env(env);
  if (env.path.empty()) {
    record(eff, "env_kind", env.kind, r.has("env_kind") ? "config" : "default");
    record(eff, "env_states", mdp.num_states(), r.has("env_states") ? "config" : "default");
    record(eff, "env_actions", mdp.num_actions(), r.has("env_actions") ? "config" : "default");
    record(eff, "env_dim", mdp.feature_dim(), "derived from env");
    if (env.kind == "lock") record(eff, "env_horizon", env.horizon, r.has("env_horizon") ? "config" : "default");
    record(eff, "env_seed", env.seed, r.has("env_seed") ? "config" : "default");
  }
  record(eff, "gamma", gamma, gamma_source);
  const int A = mdp.num_actions();
  const int d = mdp.feature_dim();

  CopoeConfig& cfg = spec.config;
  cfg.N = int_key("N", 100, 0, ">= 0");
  record(eff, "N", cfg.N, r.has("N") ? "config" : "default");
  cfg.solver.K = static_cast<int>(int_key("K", 32, 1, ">= 1"));
  record(eff, "K", cfg.solver.K, r.has("K") ? "config" : "default");
  cfg.delta = r.has("delta") ? r.real("delta") : 0.1;
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) range_error("delta", "0 < delta < 1", cfg.delta);
  record(eff, "delta", cfg.delta, r.has("delta") ? "config" : "default");

  const long n_rule = std::max(cfg.N, 1L);
  const Hyperparams h = default_hyperparams(cfg.solver.K, A, gamma, n_rule, cfg.delta);
  record(eff, "B", h.B, "3 / (1 - gamma)");
  record(eff, "G_max", h.G_max, "(2 + B) / (1 - gamma)");
  if (r.has("W") && r.has("W_scale")) throw ConfigError("W_scale", "W and W_scale are mutually exclusive");
  if (r.has("W")) {
    cfg.solver.W = r.real("W");
    if (!(cfg.solver.W > 0.0)) range_error("W", "W > 0", cfg.solver.W);
    record(eff, "W", cfg.solver.W, "config");
  } else {
    const double scale = r.has("W_scale") ? r.real("W_scale") : 1.0;
    if (!(scale > 0.0)) range_error("W_scale", "W_scale > 0", scale);
    cfg.solver.W = scale * h.W;
    record(eff, "W", cfg.solver.W, r.has("W_scale") ? "W_scale * 2 G_max" : "2 G_max");
  }
  if (r.has("eta")) {
    cfg.solver.eta = r.real("eta");
    if (!(cfg.solver.eta > 0.0)) range_error("eta", "eta > 0", cfg.solver.eta);
    record(eff, "eta", cfg.solver.eta, "config");
  } else {
    cfg.solver.eta = eta_rule(cfg.solver.K, A, cfg.solver.W);
    record(eff, "eta", cfg.solver.eta, "sqrt(ln|A|) / (sqrt(K) W)");
  }
  if (!h.warning.empty()) record(eff, "warning", h.warning, "default_hyperparams");
  if (r.has("kappa")) {
    cfg.solver.kappa = static_cast<int>(r.integer("kappa"));
    if (cfg.solver.kappa < 1) range_error("kappa", "kappa >= 1", cfg.solver.kappa);
    record(eff, "kappa", cfg.solver.kappa, "config");
  } else {
    cfg.solver.kappa = kappa_rule(gamma, n_rule, cfg.solver.K, cfg.delta, cfg.solver.eta, h.B, cfg.solver.W);
    record(eff, "kappa", cfg.solver.kappa,
           "max(1, floor((1 - gamma) ln 2 / (2 ln(8 N^2 K / delta) eta (B + W))))");
  }
  cfg.lambda = r.has("lambda") ? r.real("lambda") : 1.0;
  if (!(cfg.lambda > 0.0)) range_error("lambda", "lambda > 0", cfg.lambda);
  record(eff, "lambda", cfg.lambda, r.has("lambda") ? "config" : "default");
  if (r.has("beta") && r.has("c_beta")) throw ConfigError("c_beta", "beta and c_beta are mutually exclusive");
  if (r.has("beta")) {
    cfg.beta = r.real("beta");
    if (!(cfg.beta > 0.0)) range_error("beta", "beta > 0", cfg.beta);
    record(eff, "beta", cfg.beta, "config");
  } else {
    const double c_beta = r.has("c_beta") ? r.real("c_beta") : 0.01;
    if (!(c_beta > 0.0)) range_error("c_beta", "c_beta > 0", c_beta);
    cfg.beta = beta_practical(c_beta, d, gamma);
    record(eff, "c_beta", c_beta, r.has("c_beta") ? "config" : "default");
    record(eff, "beta", cfg.beta, "c_beta * d / (1 - gamma)^2");
  }
  record(eff, "beta_theory", beta_theory(d, cfg.solver.W, h.G_max, n_rule, cfg.delta),
         "d (W^2 + G_max^2) ln(N / delta), informational");
  if (r.has("t_max")) {
    cfg.solver.t_max = static_cast<int>(int_key("t_max", 1, 1, ">= 1"));
    record(eff, "t_max", cfg.solver.t_max, "config");
  } else {
    cfg.solver.t_max = default_t_max(n_rule, cfg.solver.K, cfg.delta, gamma);
    record(eff, "t_max", cfg.solver.t_max, "ceil(ln(16 N^2 K / delta) / (1 - gamma))");
  }
  cfg.mc_multiplier = static_cast<int>(int_key("mc_multiplier", 1, 1, ">= 1"));
  record(eff, "mc_multiplier", cfg.mc_multiplier, r.has("mc_multiplier") ? "config" : "default");
  cfg.seed = static_cast<std::uint64_t>(int_key("seed", 0, 0, ">= 0"));
  record(eff, "seed", cfg.seed, r.has("seed") ? "config" : "default");
  if (r.has("mode")) {
    try {
      cfg.mode = parse_mode(r.text("mode"));
    } catch (const ParameterError&) {
      range_error("mode", "one of copoe, pcpg_style, no_bonus", r.raw("mode"));
    }
  }
  record(eff, "mode", mode_name(cfg.mode), r.has("mode") ? "config" : "default");
  cfg.step_budget = int_key("step_budget", 0, 0, ">= 0");
  record(eff, "step_budget", cfg.step_budget, r.has("step_budget") ? "config" : "default (unlimited)");
  cfg.solver.critic.ratio_cap = r.has("ratio_cap") ? r.real("ratio_cap") : 0.0;
  if (cfg.solver.critic.ratio_cap < 0.0) range_error("ratio_cap", "ratio_cap >= 0", cfg.solver.critic.ratio_cap);
  record(eff, "ratio_cap", cfg.solver.critic.ratio_cap, r.has("ratio_cap") ? "config" : "default (off)");
  cfg.oracle = r.has("oracle") ? r.flag("oracle") : mdp.num_pairs() <= 4096;
  record(eff, "oracle", cfg.oracle, r.has("oracle") ? "config" : "default (S*A <= 4096)");

  if (r.has("seeds")) {
    const json& s = r.raw("seeds");
    if (!s.is_array() || s.empty()) throw ConfigError("seeds", "config key 'seeds' must be a nonempty list");
    for (const auto& v : s) {
      if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ConfigError("seeds", "config key 'seeds' must hold nonnegative integers");
      spec.seeds.push_back(v.get<std::uint64_t>());
    }
  }
  if (r.has("repeat")) {
    spec.repeat = static_cast<int>(int_key("repeat", 1, 1, ">= 1"));
    if (!spec.seeds.empty() && spec.seeds.size() != static_cast<std::size_t>(spec.repeat))
      throw ConfigError("repeat", "config key 'repeat' must equal the length of 'seeds'");
  } else if (!spec.seeds.empty()) {
    spec.repeat = static_cast<int>(spec.seeds.size());
  }
  if (spec.seeds.empty())
    for (int i = 0; i < spec.repeat; ++i) spec.seeds.push_back(cfg.seed + static_cast<std::uint64_t>(i));
  record(eff, "repeat", spec.repeat, r.has("repeat") ? "config" : (r.has("seeds") ? "len(seeds)" : "default"));
  record(eff, "seeds", spec.seeds, r.has("seeds") ? "config" : "seed + i");

  if (const char* env_out = std::getenv("OUT_DIR"); env_out && *env_out) {
    spec.out_dir = env_out;
    record(eff, "out_dir", spec.out_dir, "environment OUT_DIR");
  } else {
    spec.out_dir = r.has("out_dir") ? r.text("out_dir") : "out";
    record(eff, "out_dir", spec.out_dir, r.has("out_dir") ? "config" : "default");
  }
  if (r.has("checks")) {
    const json& c = r.raw("checks");
    if (!c.is_array()) throw ConfigError("checks", "config key 'checks' must be a list of names");
    for (const auto& v : c) {
      if (!v.is_string() ||
          std::find(kRunChecks.begin(), kRunChecks.end(), v.get<std::string>()) == kRunChecks.end())
        throw ConfigError("checks", "config key 'checks' has an unknown check " + v.dump());
      spec.checks.push_back(v.get<std::string>());
    }
  }
  record(eff, "checks", spec.checks, r.has("checks") ? "config" : "default");
  cfg.mc_multiplier = std::max(cfg.mc_multiplier, 1);
  return spec;
}

LinearMdp build_env(const EnvSpec& env) {
  if (!env.path.empty()) {
    LinearMdp m = read_mdp(env.path);
    return m.gamma() == env.gamma ? m : m.with_gamma(env.gamma);
  }
  if (env.kind == "random") return make_random_linear_mdp(env.states, env.actions, env.dim, env.gamma, env.seed);
  if (env.kind == "lock") return make_comb_lock(env.horizon, env.gamma, env.seed, env.actions);
  if (env.kind == "aggregated") {
    const LinearMdp base = make_random_linear_mdp(env.states, env.actions, env.dim, env.gamma, env.seed);
    const int k = env.clusters > 0 ? env.clusters : std::max(1, env.states / 2);
    std::vector<int> map(static_cast<std::size_t>(env.states));
    for (int s = 0; s < env.states; ++s) map[static_cast<std::size_t>(s)] = s % k;
    return make_aggregated_mdp(base, map, k);
  }
  throw ConfigError("env_kind", "unknown environment kind '" + env.kind + "'");
}

void write_telemetry_csv(const RunTelemetry& t, std::ostream& out) {
  out << kTelemetryHeader << '\n';
  for (const auto& r : t.rows)
    out << r.n << ',' << (r.refreshed ? 1 : 0) << ',' << r.solver_calls << ',' << r.samples_used << ','
        << format_real(r.log_det) << ',' << format_real(r.known_frac) << ',' << format_real(r.subopt)
        << ',' << format_real(r.mean_bonus) << '\n';
}

json policy_document(const LinearMdp& mdp, const RunResult& result) {
  json doc;
  doc["format"] = "copoe-policy-v1";
  doc["num_states"] = mdp.num_states();
  doc["num_actions"] = mdp.num_actions();
  const auto& last = result.outer[result.last_index()];
  const auto& best = result.outer[result.best_index()];
  doc["candidates"]["last"] = {{"n", last.first_n}, {"members", mixture_json(mdp, *last.policy)}};
  doc["candidates"]["best"] = {{"n", best.first_n}, {"members", mixture_json(mdp, *best.policy)}};
  doc["candidates"]["average"] = {{"n", nullptr}, {"members", mixture_json(mdp, result.average_policy())}};
  if (result.outer.size() > 1) {
    MixturePolicy cover;
    for (std::size_t i = 0; i + 1 < result.outer.size(); ++i)
      cover.add_mixture(*result.outer[i].policy, static_cast<double>(result.outer[i].count));
    doc["cover"] = mixture_json(mdp, cover);
    const auto& members = last.policy->members();
    const RowMatrix inner = members.back()->to_table(mdp);
    json rows = json::array();
    for (Eigen::Index s = 0; s < inner.rows(); ++s)
      rows.push_back(std::vector<double>(inner.row(s).data(), inner.row(s).data() + inner.cols()));
    doc["inner_last"] = std::move(rows);
    const GeometrySnapshot& snap = *last.snapshot;
    json sigma = json::array();
    for (Eigen::Index i = 0; i < snap.sigma().rows(); ++i) {
      const Eigen::VectorXd row = snap.sigma().row(i).transpose();
      sigma.push_back(std::vector<double>(row.data(), row.data() + row.size()));
    }
    doc["snapshot"] = {{"id", snap.id()},
                       {"beta", snap.beta()},
                       {"zero_bonus", snap.mode() == GeometrySnapshot::BonusMode::kZero},
                       {"sigma", std::move(sigma)}};
  }
  return doc;
}

int run_experiment(const ExperimentSpec& spec, std::ostream& log) {
  const fs::path out_dir = spec.out_dir;
  fs::create_directories(out_dir);
  json summary;
  summary["config"] = spec.effective;
  summary["status"] = "running";
  bool all_pass = true;
  auto flush = [&] {
    std::ofstream f(out_dir / "summary.json");
    f << summary.dump(2) << '\n';
  };
  try {
    const LinearMdp mdp = build_env(spec.env);
    summary["env"] = {{"label", mdp.label()},
                      {"num_states", mdp.num_states()},
                      {"num_actions", mdp.num_actions()},
                      {"feature_dim", mdp.feature_dim()},
                      {"gamma", mdp.gamma()}};
    std::vector<double> final_subopt, samples;
    summary["runs"] = json::array();
    for (std::size_t i = 0; i < spec.seeds.size(); ++i) {
      CopoeConfig cfg = spec.config;
      cfg.seed = spec.seeds[i];
      const RunResult res = run(mdp, cfg);
      const RunTelemetry& t = res.telemetry;
      const fs::path dir = out_dir / ("run_" + std::to_string(i) + "_seed_" + std::to_string(cfg.seed));
      fs::create_directories(dir);
      {
        std::ofstream f(dir / "telemetry.csv");
        write_telemetry_csv(t, f);
      }
      {
        std::ofstream f(dir / "policy.json");
        f << policy_document(mdp, res).dump() << '\n';
      }
      json run_doc;
      run_doc["seed"] = cfg.seed;
      run_doc["dir"] = dir.string();
      run_doc["solver_calls"] = t.solver_calls;
      run_doc["samples_used"] = t.samples_used;
      run_doc["outer_iterations"] = t.rows.size();
      run_doc["budget_exhausted"] = t.budget_exhausted;
      run_doc["collections"] = t.solver_totals.collections;
      run_doc["truncations"] = t.solver_totals.truncations;
      run_doc["max_ratio"] = t.solver_totals.max_ratio;
      run_doc["ratios_total"] = t.solver_totals.ratios_total;
      run_doc["ratios_above_two"] = t.solver_totals.ratios_above_two;
      run_doc["would_clip"] = t.solver_totals.would_clip;
      run_doc["constraint_active_fits"] = t.solver_totals.constraint_active;
      if (cfg.oracle) {
        const auto& last = res.outer[res.last_index()];
        const auto& best = res.outer[res.best_index()];
        run_doc["v_star"] = t.v_star;
        run_doc["final_subopt"] = {{"last", t.v_star - last.value},
                                   {"average", t.v_star - res.average_value},
                                   {"best", t.v_star - best.value},
                                   {"best_n", best.first_n}};
        run_doc["steps_to_threshold"] = t.steps_to_threshold;
        final_subopt.push_back(t.v_star - last.value);
      }
      samples.push_back(static_cast<double>(t.samples_used));
      json verdicts = json::object();
      for (const auto& name : spec.checks) {
        bool pass = false;
        std::string detail;
        if (name == "potential") {
          const PotentialReport p = potential_check(t);
          pass = p.pass;
          detail = "lhs " + format_real(p.lhs) + " rhs " + format_real(p.rhs);
        } else if (name == "switch_bound") {
          const double b = switch_bound(mdp.feature_dim(), cfg.N, cfg.lambda);
          pass = static_cast<double>(t.solver_calls) <= b;
          detail = std::to_string(t.solver_calls) + " calls, bound " + format_real(b);
        } else if (name == "determinant_overshoot") {
          double worst = 0.0;
          for (double g : t.refresh_log_det_gap) worst = std::max(worst, g);
          pass = worst <= std::log(4.0) + 1e-12;
          detail = "max det ratio " + format_real(std::exp(worst));
        } else if (name == "ratio_stability") {
          const auto& st = t.solver_totals;
          const double frac = st.ratios_total ? 1.0 - double(st.ratios_above_two) / st.ratios_total : 1.0;
          pass = frac >= 0.99;
          detail = "fraction <= 2: " + format_real(frac);
        }
        verdicts[name] = {{"pass", pass}, {"detail", detail}};
        all_pass = all_pass && pass;
        log << "seed " << cfg.seed << " check " << name << ": " << (pass ? "PASS" : "FAIL") << " (" << detail
            << ")\n";
      }
      run_doc["checks"] = std::move(verdicts);
      summary["runs"].push_back(std::move(run_doc));
      log << "seed " << cfg.seed << ": " << t.rows.size() << " outer iterations, " << t.solver_calls
          << " solver calls, " << t.samples_used << " env steps";
      if (cfg.oracle) log << ", final subopt " << final_subopt.back();
      log << '\n';
    }
    summary["pooled"]["samples_used"] = {{"mean", mean_of(samples)}, {"std", std_of(samples)}};
    if (!final_subopt.empty())
      summary["pooled"]["final_subopt"] = {{"mean", mean_of(final_subopt)}, {"std", std_of(final_subopt)}};
    summary["checks_passed"] = all_pass;
    summary["status"] = "ok";
    flush();
  } catch (const std::exception& e) {
    summary["status"] = "failed";
    summary["error"] = e.what();
    flush();
    throw;
  }
  return all_pass ? 0 : 1;
}

void print_check(const CheckResult& r, std::ostream& out) {
  out << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
}

std::vector<CheckResult> check_properties(const std::vector<std::string>& suites, double scale,
                                          std::uint64_t seed) {
  if (!(scale > 0.0)) throw ParameterError("scale must be positive");
  auto scaled = [&](double base, double floor_value) {
    return static_cast<int>(std::max(floor_value, std::round(base * scale)));
  };
  std::vector<CheckResult> out;
  for (const auto& name : suites) {
    if (std::find(suite_names().begin(), suite_names().end(), name) == suite_names().end())
      throw ParameterError("unknown check suite '" + name + "'");
    if (name == "determinant_ratio") {
      out.push_back(check_determinant_ratio({2, 8, 16}, scaled(1000, 10), seed));
    } else if (name == "inverse_fidelity") {
      out.push_back(check_inverse_fidelity(16, scaled(10000, 300), 256, seed));
    } else if (name == "npg_regret") {
      out.push_back(check_npg_regret(scaled(20, 2), {64, 256}, 8, seed));
    } else if (name == "policy_form") {
      out.push_back(check_policy_form(scaled(100, 5), seed));
    } else if (name == "is_unbiased") {
      IsUnbiasedOptions o;
      o.records = scaled(20000, 2000);
      o.seeds = scaled(20, 2);
      o.seed = seed;
      out.push_back(check_is_unbiased(o));
    } else if (name == "ratio_stability") {
      out.push_back(check_ratio_stability(scaled(300, 30), 16, seed));
    } else if (name == "one_sided") {
      OneSidedOptions o;
      o.seeds = scaled(10, 1);
      o.seed = seed;
      for (auto& r : check_one_sided(o)) out.push_back(std::move(r));
    } else if (name == "switch_bound" || name == "potential") {
      RunSuiteOptions o;
      o.configs = scaled(50, 3);
      o.max_N = static_cast<long>(std::max(50.0, 5000 * scale));
      o.seed = seed;
      for (auto& r : check_run_invariants(o))
        if (r.name == name || (name == "switch_bound" && r.name == "determinant_overshoot"))
          out.push_back(std::move(r));
    } else if (name == "covariance_sandwich") {
      SandwichOptions o;
      o.seeds = scaled(10, 1);
      o.seed = seed;
      out.push_back(check_covariance_sandwich(o));
    } else if (name == "transfer_zero") {
      for (auto& r : check_transfer(scaled(10, 2), seed)) out.push_back(std::move(r));
    }
  }
  return out;
}

int sweep(const json& base, const std::map<std::string, std::vector<json>>& axes,
          const fs::path& base_dir, const std::string& out_dir, std::ostream& log) {
  std::vector<std::pair<std::string, std::vector<json>>> dims(axes.begin(), axes.end());
  for (const auto& [key, values] : dims)
    if (values.empty()) throw ConfigError(key, "sweep axis '" + key + "' has no values");
  std::vector<std::size_t> idx(dims.size(), 0);
  int failures = 0;
  int point = 0;
  while (true) {
    json doc = base;
    std::string name = "point_" + std::to_string(point);
    for (std::size_t i = 0; i < dims.size(); ++i) {
      doc[dims[i].first] = dims[i].second[idx[i]];
      name += "_" + dims[i].first + "=" + dims[i].second[idx[i]].dump();
    }
    std::erase_if(name, [](char c) { return c == '"' || c == '/' || c == ' '; });
    doc["out_dir"] = (fs::path(out_dir) / name).string();
    ExperimentSpec spec = parse_config_text(doc.dump(), base_dir);
    spec.out_dir = (fs::path(out_dir) / name).string();
    spec.effective["out_dir"] = {{"value", spec.out_dir}, {"source", "sweep"}};
    log << "sweep " << name << '\n';
    failures += run_experiment(spec, log) != 0;
    ++point;
    std::size_t i = 0;
    for (; i < dims.size(); ++i) {
      if (++idx[i] < dims[i].second.size()) break;
      idx[i] = 0;
    }
    if (i == dims.size()) break;
  }
  return failures;
}

}  // namespace copoe
