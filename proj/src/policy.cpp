#include "copoe/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "copoe/errors.hpp"

namespace copoe {

namespace {
constexpr long kMaxCachedPairs = 1L << 20;
}

ActionId sample_from(std::span<const double> probs, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double acc = 0.0;
  ActionId last_positive = 0;
  for (std::size_t a = 0; a < probs.size(); ++a) {
    if (probs[a] <= 0.0) continue;
    acc += probs[a];
    last_positive = static_cast<ActionId>(a);
    if (u < acc) return last_positive;
  }
  return last_positive;
}

Eigen::VectorXd StochasticPolicy::action_probs(const LinearMdp& mdp, StateId s) const {
  Eigen::VectorXd p(mdp.num_actions());
  action_probs(mdp, s, std::span<double>(p.data(), static_cast<std::size_t>(p.size())));
  return p;
}

ActionId StochasticPolicy::sample_action(const LinearMdp& mdp, StateId s, Rng& rng) const {
  constexpr int kStack = 16;
  const auto A = static_cast<std::size_t>(mdp.num_actions());
  if (A <= kStack) {
    double buf[kStack];
    action_probs(mdp, s, std::span<double>(buf, A));
    return sample_from(std::span<const double>(buf, A), rng);
  }
  std::vector<double> buf(A);
  action_probs(mdp, s, buf);
  return sample_from(buf, rng);
}

RowMatrix StochasticPolicy::to_table(const LinearMdp& mdp) const {
  RowMatrix t(mdp.num_states(), mdp.num_actions());
  for (StateId s = 0; s < mdp.num_states(); ++s)
    action_probs(mdp, s, std::span<double>(t.row(s).data(), static_cast<std::size_t>(t.cols())));
  return t;
}

TablePolicy::TablePolicy(RowMatrix probs) : probs_(std::move(probs)) {
  for (Eigen::Index s = 0; s < probs_.rows(); ++s) {
    if (probs_.row(s).minCoeff() < 0.0 || std::abs(probs_.row(s).sum() - 1.0) > 1e-9)
      throw ParameterError("policy table rows must be probability vectors");
  }
}

TablePolicy TablePolicy::uniform(int num_states, int num_actions) {
  return TablePolicy(RowMatrix::Constant(num_states, num_actions, 1.0 / num_actions));
}

TablePolicy TablePolicy::deterministic(const std::vector<ActionId>& actions, int num_actions) {
  RowMatrix t = RowMatrix::Zero(static_cast<Eigen::Index>(actions.size()), num_actions);
  for (std::size_t s = 0; s < actions.size(); ++s) t(static_cast<Eigen::Index>(s), actions[s]) = 1.0;
  return TablePolicy(std::move(t));
}

void TablePolicy::action_probs(const LinearMdp& mdp, StateId s, std::span<double> out) const {
  if (!mdp.valid_state(s) || s >= probs_.rows()) throw ParameterError("policy: invalid state");
  for (std::size_t a = 0; a < out.size(); ++a) out[a] = probs_(s, static_cast<Eigen::Index>(a));
}

LogLinearPolicy::LogLinearPolicy(SnapshotPtr snapshot, double eta, int dim)
    : snapshot_(std::move(snapshot)), eta_(eta), weight_sum_(Eigen::VectorXd::Zero(dim)) {
  if (!snapshot_) throw ParameterError("policy needs a geometry snapshot");
  if (!(eta_ >= 0.0) || !std::isfinite(eta_)) throw ParameterError("eta must be finite and nonnegative");
}

void LogLinearPolicy::closed_form_probs(const LinearMdp& mdp, StateId s, std::span<double> out) const {
  const int A = mdp.num_actions();
  const GeometrySnapshot& g = *snapshot_;
  if (!g.known_state(s)) {
    int unknown = 0;
    for (ActionId a = 0; a < A; ++a) unknown += !g.known_pair(s, a);
    // an unknown state has at least one unknown action by definition
    for (ActionId a = 0; a < A; ++a)
      out[static_cast<std::size_t>(a)] = g.known_pair(s, a) ? 0.0 : 1.0 / unknown;
    return;
  }
  const double k = static_cast<double>(history_.size());
  double max_logit = -std::numeric_limits<double>::infinity();
  for (ActionId a = 0; a < A; ++a) {
    const double c = eta_ * (mdp.phi(s, a).dot(weight_sum_) + k * g.bonus_phi(s, a));
    out[static_cast<std::size_t>(a)] = c;
    max_logit = std::max(max_logit, c);
  }
  double z = 0.0;
  for (ActionId a = 0; a < A; ++a) {
    auto& v = out[static_cast<std::size_t>(a)];
    v = std::exp(v - max_logit);
    z += v;
  }
  for (ActionId a = 0; a < A; ++a) out[static_cast<std::size_t>(a)] /= z;
}

void LogLinearPolicy::action_probs(const LinearMdp& mdp, StateId s, std::span<double> out) const {
  if (cache_ && s < cache_->rows()) {
    const double* row = cache_->row(s).data();
    std::copy(row, row + out.size(), out.begin());
    return;
  }
  closed_form_probs(mdp, s, out);
}

LogLinearPolicy LogLinearPolicy::appended(const Eigen::VectorXd& w) const {
  if (w.size() != weight_sum_.size()) throw ParameterError("critic weight dimension mismatch");
  LogLinearPolicy next(snapshot_, eta_, static_cast<int>(weight_sum_.size()));
  next.history_ = history_;
  next.history_.push_back(w);
  next.weight_sum_ = weight_sum_ + w;
  return next;
}

void LogLinearPolicy::materialize(const LinearMdp& mdp) {
  if (static_cast<long>(mdp.num_pairs()) > kMaxCachedPairs) return;
  RowMatrix t(mdp.num_states(), mdp.num_actions());
  for (StateId s = 0; s < mdp.num_states(); ++s)
    closed_form_probs(mdp, s, std::span<double>(t.row(s).data(), static_cast<std::size_t>(t.cols())));
  cache_ = std::make_shared<const RowMatrix>(std::move(t));
}

LogLinearPolicy init_policy(SnapshotPtr snapshot, double eta, const LinearMdp& mdp) {
  LogLinearPolicy p(std::move(snapshot), eta, mdp.feature_dim());
  p.materialize(mdp);
  return p;
}

void MixturePolicy::add(PolicyPtr member, double weight) {
  if (!member) throw ParameterError("mixture member must not be null");
  if (!(weight > 0.0)) throw ParameterError("mixture weights must be positive");
  members_.push_back(std::move(member));
  weights_.push_back(weight);
  cumulative_.push_back(total_weight() + weight);
}

void MixturePolicy::add_mixture(const MixturePolicy& other, double total_weight_in) {
  if (other.empty()) throw ParameterError("cannot add an empty mixture");
  const double scale = total_weight_in / other.total_weight();
  for (std::size_t i = 0; i < other.size(); ++i) add(other.members_[i], other.weights_[i] * scale);
}

std::size_t MixturePolicy::sample_index(Rng& rng) const {
  if (members_.empty()) throw ParameterError("cannot sample from an empty mixture");
  std::uniform_real_distribution<double> unif(0.0, total_weight());
  const double u = unif(rng);
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  return static_cast<std::size_t>(it - cumulative_.begin());
}

const StochasticPolicy& MixturePolicy::sample_member(Rng& rng) const {
  return *members_[sample_index(rng)];
}

}  // namespace copoe
