#include "copoe/linmdp_env.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "copoe/errors.hpp"
#include "json.hpp"

namespace copoe {

namespace {

using nlohmann::json;

Vector dirichlet(int n, Rng& rng) {
  std::gamma_distribution<double> g(1.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = g(rng);
  double total = v.sum();
  if (total <= 0.0) {
    v.setConstant(1.0 / n);
    return v;
  }
  return v / total;
}

void check_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ParameterError("gamma must lie in [0, 1)");
}

json rows_to_json(const RowMatrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

RowMatrix rows_from_json(const json& j, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
    throw ParameterError(std::string("environment table '") + name + "' has wrong row count");
  RowMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ParameterError(std::string("environment table '") + name + "' has wrong row width");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace

LinearMdp::LinearMdp(int num_states, int num_actions, double gamma, RowMatrix features,
                     Vector reward, RowMatrix transitions, std::optional<RowMatrix> mu,
                     StateId start_state, std::string label, std::uint64_t seed)
    : num_states_(num_states),
      num_actions_(num_actions),
      gamma_(gamma),
      features_(std::move(features)),
      reward_(std::move(reward)),
      transitions_(std::move(transitions)),
      mu_(std::move(mu)),
      start_state_(start_state),
      label_(std::move(label)),
      seed_(seed) {
  if (num_states_ < 1 || num_actions_ < 1) throw ParameterError("MDP needs at least one state and action");
  check_gamma(gamma_);
  const Eigen::Index pairs = static_cast<Eigen::Index>(num_states_) * num_actions_;
  if (features_.rows() != pairs || features_.cols() < 1)
    throw ParameterError("feature table must be (S*A) x d with d >= 1");
  if (reward_.size() != pairs) throw ParameterError("reward table must have S*A entries");
  if (transitions_.rows() != pairs || transitions_.cols() != num_states_)
    throw ParameterError("transition table must be (S*A) x S");
  if (mu_ && (mu_->rows() != num_states_ || mu_->cols() != features_.cols()))
    throw ParameterError("mu table must be S x d");
  if (!valid_state(start_state_)) throw ParameterError("start state out of range");

  cdf_.resize(pairs, num_states_);
  for (Eigen::Index i = 0; i < pairs; ++i) {
    double acc = 0.0;
    for (int s = 0; s < num_states_; ++s) {
      acc += std::max(0.0, transitions_(i, s));
      cdf_(i, s) = acc;
    }
  }
}

StateId LinearMdp::sample_next(StateId s, ActionId a, double u) const {
  const auto row = cdf_.row(pair_index(s, a));
  const double target = u * row(num_states_ - 1);
  const double* begin = row.data();
  const double* end = begin + num_states_;
  const double* it = std::upper_bound(begin, end, target);
  if (it == end) {
    // u rounded to the total mass: take the last state with positive mass
    for (int next = num_states_ - 1; next >= 0; --next)
      if (transitions_(pair_index(s, a), next) > 0.0) return next;
    return num_states_ - 1;
  }
  return static_cast<StateId>(it - begin);
}

LinearMdp LinearMdp::with_gamma(double gamma) const {
  return LinearMdp(num_states_, num_actions_, gamma, features_, reward_, transitions_, mu_,
                   start_state_, label_, seed_);
}

StepResult step(const LinearMdp& mdp, StateId s, ActionId a, Rng& rng) {
  if (!mdp.valid_pair(s, a)) throw ParameterError("step: invalid state-action index");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  return {mdp.sample_next(s, a, unif(rng)), mdp.reward(s, a)};
}

LinearMdp make_random_linear_mdp(int num_states, int num_actions, int dim, double gamma,
                                 std::uint64_t seed) {
  if (num_states < 1 || num_actions < 1 || dim < 1)
    throw ParameterError("make_random_linear_mdp: dimensions must be positive");
  check_gamma(gamma);
  Rng rng = make_rng(seed, "env");

  RowMatrix mu(num_states, dim);
  for (int j = 0; j < dim; ++j) mu.col(j) = dirichlet(num_states, rng);

  const int pairs = num_states * num_actions;
  RowMatrix features(pairs, dim);
  for (int i = 0; i < pairs; ++i) features.row(i) = dirichlet(dim, rng).transpose();

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector theta(dim);
  for (int j = 0; j < dim; ++j) theta(j) = unif(rng);

  RowMatrix transitions = features * mu.transpose();
  Vector reward = features * theta;
  std::ostringstream label;
  label << "random_linear(S=" << num_states << ",A=" << num_actions << ",d=" << dim << ")";
  return LinearMdp(num_states, num_actions, gamma, std::move(features), std::move(reward),
                   std::move(transitions), std::move(mu), 0, label.str(), seed);
}

std::vector<ActionId> comb_lock_solution(int horizon_len, std::uint64_t seed, int num_actions) {
  if (horizon_len < 2) throw ParameterError("combination lock needs horizon_len >= 2");
  if (num_actions < 1) throw ParameterError("combination lock needs at least one action");
  Rng rng = make_rng(seed, "env:lock");
  std::uniform_int_distribution<int> pick(0, num_actions - 1);
  std::vector<ActionId> code(static_cast<std::size_t>(horizon_len));
  for (auto& a : code) a = pick(rng);
  return code;
}

LinearMdp make_comb_lock(int horizon_len, double gamma, std::uint64_t seed, int num_actions) {
  check_gamma(gamma);
  const std::vector<ActionId> code = comb_lock_solution(horizon_len, seed, num_actions);
  const int num_states = horizon_len + 1;
  const StateId sink = horizon_len;
  const int pairs = num_states * num_actions;

  RowMatrix features = RowMatrix::Identity(pairs, pairs);
  Vector reward = Vector::Zero(pairs);
  RowMatrix transitions = RowMatrix::Zero(pairs, num_states);
  for (StateId s = 0; s < num_states; ++s) {
    for (ActionId a = 0; a < num_actions; ++a) {
      const int i = s * num_actions + a;
      if (s < horizon_len - 1 && a == code[static_cast<std::size_t>(s)]) {
        transitions(i, s + 1) = 1.0;
      } else {
        transitions(i, sink) = 1.0;
      }
      if (s == horizon_len - 1) reward(i) = 1.0;
    }
  }
  // one-hot features: mu(s', (s,a)) = p(s'|s,a)
  RowMatrix mu = transitions.transpose();
  std::ostringstream label;
  label << "comb_lock(H=" << horizon_len << ",A=" << num_actions << ")";
  return LinearMdp(num_states, num_actions, gamma, std::move(features), std::move(reward),
                   std::move(transitions), std::move(mu), 0, label.str(), seed);
}

LinearMdp make_aggregated_mdp(const LinearMdp& base, const std::vector<int>& cluster_map,
                              std::optional<int> num_clusters) {
  if (static_cast<int>(cluster_map.size()) != base.num_states())
    throw ParameterError("cluster map must assign every state");
  int clusters = 0;
  for (int c : cluster_map) {
    if (c < 0) throw ParameterError("cluster index out of range");
    clusters = std::max(clusters, c + 1);
  }
  if (num_clusters) {
    if (*num_clusters < clusters) throw ParameterError("cluster index out of range");
    clusters = *num_clusters;
  }
  const int A = base.num_actions();
  const int dim = clusters * A;
  RowMatrix features = RowMatrix::Zero(base.num_pairs(), dim);
  for (StateId s = 0; s < base.num_states(); ++s)
    for (ActionId a = 0; a < A; ++a)
      features(base.pair_index(s, a), cluster_map[static_cast<std::size_t>(s)] * A + a) = 1.0;

  std::ostringstream label;
  label << "aggregated(" << base.label() << ",clusters=" << clusters << ",misspecified)";
  return LinearMdp(base.num_states(), A, base.gamma(), std::move(features), base.rewards(),
                   base.transitions(), std::nullopt, base.start_state(), label.str(), base.seed());
}

ValidationReport validate_linear(const LinearMdp& mdp, double tolerance) {
  ValidationReport rep;
  rep.tolerance = tolerance;
  const RowMatrix& P = mdp.transitions();
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    rep.max_row_sum_deviation = std::max(rep.max_row_sum_deviation, std::abs(P.row(i).sum() - 1.0));
    rep.max_negative_mass = std::max(rep.max_negative_mass, -std::min(0.0, P.row(i).minCoeff()));
  }
  const RowMatrix& F = mdp.features();
  rep.max_feature_norm = F.rowwise().norm().maxCoeff();
  if (mdp.mu()) rep.max_factor_residual = (P - F * mdp.mu()->transpose()).cwiseAbs().maxCoeff();

  // population least squares over all (s,a) for every one-hot f(s') at once
  Eigen::MatrixXd Fd = F;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(Fd);
  Eigen::MatrixXd Pd = P;
  Eigen::MatrixXd fitted = Fd * cod.solve(Pd);
  rep.closure_residual = (fitted - Pd).cwiseAbs().maxCoeff();
  Eigen::VectorXd rd = mdp.rewards();
  rep.reward_residual = (Fd * cod.solve(rd) - rd).cwiseAbs().maxCoeff();

  rep.pass = rep.max_row_sum_deviation <= tolerance && rep.max_negative_mass <= tolerance &&
             rep.closure_residual <= tolerance &&
             (!rep.max_factor_residual || *rep.max_factor_residual <= tolerance);
  return rep;
}

std::string mdp_to_json(const LinearMdp& mdp) {
  json j;
  j["format"] = "copoe-env-v1";
  j["num_states"] = mdp.num_states();
  j["num_actions"] = mdp.num_actions();
  j["feature_dim"] = mdp.feature_dim();
  j["gamma"] = mdp.gamma();
  j["start_state"] = mdp.start_state();
  j["label"] = mdp.label();
  j["seed"] = mdp.seed();
  j["features"] = rows_to_json(mdp.features());
  j["reward"] = std::vector<double>(mdp.rewards().data(), mdp.rewards().data() + mdp.rewards().size());
  j["transitions"] = rows_to_json(mdp.transitions());
  j["mu"] = mdp.mu() ? rows_to_json(*mdp.mu()) : json(nullptr);
  return j.dump();
}

LinearMdp mdp_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParameterError(std::string("malformed environment document: ") + e.what());
  }
  try {
    const int S = j.at("num_states").get<int>();
    const int A = j.at("num_actions").get<int>();
    const int d = j.at("feature_dim").get<int>();
    if (S < 1 || A < 1 || d < 1) throw ParameterError("environment dimensions must be positive");
    RowMatrix features = rows_from_json(j.at("features"), S * A, d, "features");
    const auto& rj = j.at("reward");
    if (!rj.is_array() || static_cast<int>(rj.size()) != S * A)
      throw ParameterError("environment table 'reward' has wrong length");
    Vector reward(S * A);
    for (int i = 0; i < S * A; ++i) reward(i) = rj[static_cast<std::size_t>(i)].get<double>();
    RowMatrix transitions = rows_from_json(j.at("transitions"), S * A, S, "transitions");
    std::optional<RowMatrix> mu;
    if (j.contains("mu") && !j["mu"].is_null()) mu = rows_from_json(j["mu"], S, d, "mu");
    return LinearMdp(S, A, j.at("gamma").get<double>(), std::move(features), std::move(reward),
                     std::move(transitions), std::move(mu), j.value("start_state", 0),
                     j.value("label", std::string{}), j.value("seed", std::uint64_t{0}));
  } catch (const json::exception& e) {
    throw ParameterError(std::string("invalid environment document: ") + e.what());
  }
}

void write_mdp(const LinearMdp& mdp, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParameterError("cannot write environment file " + path.string());
  out << mdp_to_json(mdp) << '\n';
}

LinearMdp read_mdp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot read environment file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return mdp_from_json(buf.str());
}

}  // namespace copoe
