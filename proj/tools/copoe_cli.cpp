#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "copoe/driver.hpp"
#include "copoe/errors.hpp"
#include "copoe/explore_geometry.hpp"
#include "copoe/harness.hpp"
#include "copoe/linmdp_env.hpp"
#include "copoe/oracle_eval.hpp"
#include "copoe/policy.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace copoe;

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open " + path.string());
  return json::parse(in);
}

RowMatrix table_from(const json& rows) {
  RowMatrix t(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.at(0).size()));
  for (std::size_t s = 0; s < rows.size(); ++s)
    for (std::size_t a = 0; a < rows[s].size(); ++a)
      t(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) = rows[s][a].get<double>();
  return t;
}

MixturePolicy mixture_from(const json& members) {
  MixturePolicy mix;
  for (const auto& m : members)
    mix.add(std::make_shared<TablePolicy>(table_from(m.at("probs"))), m.at("weight").get<double>());
  return mix;
}

int cmd_eval(const std::string& env_path, const std::string& policy_path, bool transfer, double W) {
  const LinearMdp mdp = read_mdp(env_path);
  const json doc = read_json(policy_path);
  if (doc.value("num_states", -1) != mdp.num_states() || doc.value("num_actions", -1) != mdp.num_actions())
    throw ConfigError("policy", "policy file " + policy_path + " does not match the environment's state/action counts");
  const auto [pi_star, q_star] = optimal_policy(mdp);
  const double v_star = q_star.v(mdp.start_state());
  std::cout << "V*(s0) = " << v_star << '\n';
  for (const auto& name : {"last", "best", "average"}) {
    if (!doc.at("candidates").contains(name)) continue;
    const MixturePolicy mix = mixture_from(doc["candidates"][name]["members"]);
    const double v = policy_value(mdp, mix);
    std::cout << name << ": V(s0) = " << v << ", suboptimality = " << v_star - v << '\n';
  }
  if (transfer) {
    if (!doc.contains("snapshot")) throw ConfigError("", "policy file has no snapshot; transfer error unavailable");
    const json& sj = doc["snapshot"];
    const Eigen::MatrixXd sigma = table_from(sj["sigma"]);
    const CovarianceState st = CovarianceState::from_matrix(sigma, 1.0);
    const auto mode = sj["zero_bonus"].get<bool>() ? GeometrySnapshot::BonusMode::kZero
                                                   : GeometrySnapshot::BonusMode::kOptimistic;
    const GeometrySnapshot snap(st, mdp, BonusParams(sj["beta"].get<double>(), mdp.gamma()),
                                sj["id"].get<std::uint64_t>(), mode);
    const TablePolicy inner(table_from(doc["inner_last"]));
    const Vector rho = occupancy(mdp, mixture_from(doc["cover"]), mdp.start_state()).dist;
    const double w_cap = W > 0.0 ? W : 2.0 * (2.0 + 3.0 / (1.0 - mdp.gamma())) / (1.0 - mdp.gamma());
    std::cout << "transfer error (last solver call, final iterate) = "
              << transfer_error(mdp, pi_star, snap, inner, rho, w_cap) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"COPOE on finite linear MDPs"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-env", "generate an environment file");
  std::string kind = "random", out;
  int states = 5, actions = 2, dim = 3, horizon = 8, clusters = 0;
  double gamma = 0.9;
  std::uint64_t seed = 0;
  gen->add_option("--kind", kind, "random | lock | aggregated")->check(CLI::IsMember({"random", "lock", "aggregated"}));
  gen->add_option("--states", states, "number of states (random, aggregated)");
  gen->add_option("--actions", actions, "number of actions");
  gen->add_option("--dim", dim, "feature dimension (random, aggregated base)");
  gen->add_option("--horizon", horizon, "chain length (lock)");
  gen->add_option("--clusters", clusters, "number of clusters (aggregated)");
  gen->add_option("--gamma", gamma, "discount factor");
  gen->add_option("--seed", seed, "generator seed");
  gen->add_option("--out", out, "output file")->required();

  auto* run_cmd = app.add_subcommand("run", "run COPOE for every configured seed");
  std::string env_file, config_file, mode, out_dir;
  std::int64_t run_seed = -1;
  run_cmd->add_option("--env", env_file, "environment file (overrides the config)");
  run_cmd->add_option("--config", config_file, "flat JSON config");
  run_cmd->add_option("--mode", mode, "copoe | pcpg_style | no_bonus");
  run_cmd->add_option("--seed", run_seed, "master seed (overrides the config)");
  run_cmd->add_option("--out-dir", out_dir, "output directory");

  auto* eval = app.add_subcommand("eval", "evaluate a stored policy exactly");
  std::string policy_file;
  bool transfer = false;
  double eval_w = 0.0;
  eval->add_option("--env", env_file, "environment file")->required();
  eval->add_option("--policy", policy_file, "policy.json from a run")->required();
  eval->add_flag("--transfer", transfer, "also report the transfer error");
  eval->add_option("--W", eval_w, "norm cap for the transfer-error fit (default 2 G_max)");

  auto* check = app.add_subcommand("check", "run property suites");
  std::vector<std::string> suites;
  double scale = 1.0;
  std::uint64_t check_seed = 0;
  check->add_option("--suite", suites, "suite name (repeatable; default all)");
  check->add_option("--scale", scale, "size multiplier, 1 = acceptance scale");
  check->add_option("--seed", check_seed, "seed");

  auto* sweep_cmd = app.add_subcommand("sweep", "cartesian sweep over config keys");
  std::vector<std::string> axes;
  sweep_cmd->add_option("--config", config_file, "base config")->required();
  sweep_cmd->add_option("--axis", axes, "key=v1,v2,... (values parsed as JSON)")->required();
  sweep_cmd->add_option("--out-dir", out_dir, "root output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      LinearMdp mdp = [&] {
        if (kind == "random") return make_random_linear_mdp(states, actions, dim, gamma, seed);
        if (kind == "lock") return make_comb_lock(horizon, gamma, seed, actions);
        EnvSpec e;
        e.kind = kind;
        e.states = states;
        e.actions = actions;
        e.dim = dim;
        e.clusters = clusters;
        e.seed = seed;
        e.gamma = gamma;
        return build_env(e);
      }();
      write_mdp(mdp, out);
      std::cout << "wrote " << mdp.label() << " to " << out << '\n';
      return 0;
    }
    if (run_cmd->parsed()) {
      json doc = config_file.empty() ? json::object() : read_json(config_file);
      const fs::path base = config_file.empty() ? fs::current_path() : fs::path(config_file).parent_path();
      if (!env_file.empty()) doc["env"] = fs::absolute(env_file).string();
      if (!mode.empty()) doc["mode"] = mode;
      if (run_seed >= 0) {
        doc["seed"] = run_seed;
        doc.erase("seeds");
      }
      if (!out_dir.empty()) doc["out_dir"] = out_dir;
      const ExperimentSpec spec = parse_config_text(doc.dump(), base);
      const int status = run_experiment(spec, std::cout);
      std::cout << "summary: " << (fs::path(spec.out_dir) / "summary.json").string() << '\n';
      return status;
    }
    if (eval->parsed()) return cmd_eval(env_file, policy_file, transfer, eval_w);
    if (check->parsed()) {
      if (suites.empty()) suites = suite_names();
      bool ok = true;
      for (const auto& r : check_properties(suites, scale, check_seed)) {
        print_check(r, std::cout);
        ok = ok && r.pass;
      }
      return ok ? 0 : 1;
    }
    if (sweep_cmd->parsed()) {
      const json base = read_json(config_file);
      std::map<std::string, std::vector<json>> grid;
      for (const auto& axis : axes) {
        const auto eq = axis.find('=');
        if (eq == std::string::npos) throw ConfigError(axis, "sweep axis must look like key=v1,v2");
        const std::string key = axis.substr(0, eq);
        std::stringstream values(axis.substr(eq + 1));
        for (std::string v; std::getline(values, v, ',');) {
          try {
            grid[key].push_back(json::parse(v));
          } catch (const json::parse_error&) {
            grid[key].push_back(v);
          }
        }
      }
      const std::string root = out_dir.empty() ? base.value("out_dir", std::string("sweep")) : out_dir;
      const int failed = sweep(base, grid, fs::path(config_file).parent_path(), root, std::cout);
      return failed == 0 ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
