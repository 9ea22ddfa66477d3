#include "copoe/explore_geometry.hpp"

#include <cmath>
#include <numbers>

#include "copoe/errors.hpp"

namespace copoe {

CovarianceState::CovarianceState(int dim, double lambda, int refactor_period)
    : lambda_(lambda), refactor_period_(refactor_period) {
  if (dim < 1) throw ParameterError("covariance dimension must be positive");
  if (!(lambda > 0.0)) throw ParameterError("lambda must be positive");
  if (refactor_period < 1) throw ParameterError("refactor period must be positive");
  sigma_ = lambda * Eigen::MatrixXd::Identity(dim, dim);
  sigma_inv_ = (1.0 / lambda) * Eigen::MatrixXd::Identity(dim, dim);
  log_det_ = dim * std::log(lambda);
}

CovarianceState CovarianceState::from_matrix(const Eigen::MatrixXd& sigma, double lambda,
                                             long update_count) {
  if (sigma.rows() != sigma.cols()) throw ParameterError("covariance must be square");
  CovarianceState st(static_cast<int>(sigma.rows()), lambda);
  st.sigma_ = 0.5 * (sigma + sigma.transpose());
  st.update_count_ = update_count;
  st.refactorize();
  return st;
}

void CovarianceState::check_dim(Eigen::Index n) const {
  if (n != sigma_.rows()) throw ParameterError("feature dimension mismatch");
}

double CovarianceState::quad_form(const Eigen::Ref<const Eigen::VectorXd>& phi) const {
  check_dim(phi.size());
  return std::max(0.0, phi.dot(sigma_inv_ * phi));
}

double CovarianceState::rank1_update(const Eigen::Ref<const Eigen::VectorXd>& phi) {
  check_dim(phi.size());
  const Eigen::VectorXd u = sigma_inv_ * phi;
  const double q = std::max(0.0, phi.dot(u));
  sigma_.noalias() += phi * phi.transpose();
  sigma_inv_.noalias() -= (u * u.transpose()) / (1.0 + q);
  log_det_ += std::log1p(q);
  ++update_count_;
  if (update_count_ % refactor_period_ == 0) refactorize();
  return q;
}

void CovarianceState::refactorize() {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma_);
  if (llt.info() != Eigen::Success) throw ParameterError("covariance lost positive definiteness");
  sigma_inv_ = llt.solve(Eigen::MatrixXd::Identity(dim(), dim()));
  sigma_inv_ = 0.5 * (sigma_inv_ + sigma_inv_.transpose()).eval();
  log_det_ = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

double CovarianceState::dense_log_det() const {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma_);
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

CovarianceState init_covariance(int dim, double lambda, int refactor_period) {
  return CovarianceState(dim, lambda, refactor_period);
}

BonusParams::BonusParams(double beta_in, double gamma_in) : beta(beta_in), gamma(gamma_in) {
  if (!(beta > 0.0)) throw ParameterError("beta must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ParameterError("gamma must lie in [0, 1)");
}

double quad_form(const CovarianceState& state, const Eigen::Ref<const Eigen::VectorXd>& phi) {
  return state.quad_form(phi);
}

void rank1_update(CovarianceState& state, const Eigen::Ref<const Eigen::VectorXd>& phi) {
  state.rank1_update(phi);
}

bool is_known(const CovarianceState& state, const Eigen::Ref<const Eigen::VectorXd>& phi,
              const BonusParams& params) {
  return std::sqrt(params.beta) * std::sqrt(state.quad_form(phi)) < 1.0;
}

bool is_known_state(const CovarianceState& state, const LinearMdp& mdp, StateId s,
                    const BonusParams& params) {
  if (!mdp.valid_state(s)) throw ParameterError("invalid state index");
  for (ActionId a = 0; a < mdp.num_actions(); ++a)
    if (!is_known(state, mdp.phi(s, a), params)) return false;
  return true;
}

double bonus(const CovarianceState& state, const LinearMdp& mdp, StateId s, ActionId a,
             const BonusParams& params) {
  if (!mdp.valid_pair(s, a)) throw ParameterError("invalid state-action index");
  if (is_known_state(state, mdp, s, params))
    return 2.0 * std::sqrt(params.beta) * std::sqrt(state.quad_form(mdp.phi(s, a)));
  if (!is_known(state, mdp.phi(s, a), params)) return params.indicator_bonus();
  return 0.0;
}

bool should_refresh(double current_log_det, double snapshot_log_det, long outer_index) {
  return outer_index == 1 || current_log_det - snapshot_log_det > std::numbers::ln2;
}

GeometrySnapshot::GeometrySnapshot(const CovarianceState& state, const LinearMdp& mdp,
                                   const BonusParams& params, std::uint64_t id, BonusMode mode)
    : id_(id),
      beta_(params.beta),
      gamma_(params.gamma),
      log_det_(state.log_det()),
      mode_(mode),
      num_actions_(mdp.num_actions()),
      sigma_(state.sigma()),
      sigma_inv_(state.sigma_inv()) {
  if (state.dim() != mdp.feature_dim()) throw ParameterError("feature dimension mismatch");
  const auto S = static_cast<std::size_t>(mdp.num_states());
  const auto pairs = static_cast<std::size_t>(mdp.num_pairs());
  known_pair_.assign(pairs, 0);
  known_state_.assign(S, 0);
  bonus_phi_.assign(pairs, 0.0);
  bonus_.assign(pairs, 0.0);
  std::vector<double> elliptic(pairs, 0.0);
  const double root_beta = std::sqrt(params.beta);
  for (StateId s = 0; s < mdp.num_states(); ++s) {
    bool all_known = true;
    for (ActionId a = 0; a < num_actions_; ++a) {
      const std::size_t i = idx(s, a);
      elliptic[i] = root_beta * std::sqrt(state.quad_form(mdp.phi(s, a)));
      known_pair_[i] = elliptic[i] < 1.0;
      all_known = all_known && known_pair_[i];
    }
    known_state_[static_cast<std::size_t>(s)] = all_known;
    for (ActionId a = 0; a < num_actions_; ++a) {
      const std::size_t i = idx(s, a);
      if (all_known) bonus_phi_[i] = elliptic[i];
      if (mode_ == BonusMode::kZero) continue;
      if (all_known)
        bonus_[i] = 2.0 * elliptic[i];
      else if (!known_pair_[i])
        bonus_[i] = params.indicator_bonus();
    }
  }
  if (mode_ == BonusMode::kZero) std::fill(bonus_phi_.begin(), bonus_phi_.end(), 0.0);
}

std::shared_ptr<const GeometrySnapshot> GeometrySnapshot::all_known(const LinearMdp& mdp,
                                                                    std::uint64_t id) {
  auto snap = std::shared_ptr<GeometrySnapshot>(new GeometrySnapshot());
  snap->id_ = id;
  snap->beta_ = 0.0;
  snap->gamma_ = mdp.gamma();
  snap->mode_ = BonusMode::kZero;
  snap->num_actions_ = mdp.num_actions();
  const auto pairs = static_cast<std::size_t>(mdp.num_pairs());
  snap->known_pair_.assign(pairs, 1);
  snap->known_state_.assign(static_cast<std::size_t>(mdp.num_states()), 1);
  snap->bonus_phi_.assign(pairs, 0.0);
  snap->bonus_.assign(pairs, 0.0);
  return snap;
}

std::vector<ActionId> GeometrySnapshot::unknown_actions(StateId s) const {
  std::vector<ActionId> out;
  for (ActionId a = 0; a < num_actions_; ++a)
    if (!known_pair(s, a)) out.push_back(a);
  return out;
}

double GeometrySnapshot::known_pair_fraction() const {
  if (known_pair_.empty()) return 0.0;
  double n = 0;
  for (char k : known_pair_) n += k;
  return n / static_cast<double>(known_pair_.size());
}

double GeometrySnapshot::known_state_fraction() const {
  if (known_state_.empty()) return 0.0;
  double n = 0;
  for (char k : known_state_) n += k;
  return n / static_cast<double>(known_state_.size());
}

Eigen::VectorXd GeometrySnapshot::bonus_table() const {
  return Eigen::Map<const Eigen::VectorXd>(bonus_.data(), static_cast<Eigen::Index>(bonus_.size()));
}

Eigen::VectorXd GeometrySnapshot::bonus_phi_table() const {
  return Eigen::Map<const Eigen::VectorXd>(bonus_phi_.data(),
                                           static_cast<Eigen::Index>(bonus_phi_.size()));
}

double lambda_min_formula(int dim, long n, double delta) {
  if (dim < 1 || n < 1 || !(delta > 0.0 && delta < 1.0))
    throw ParameterError("lambda_min_formula: invalid arguments");
  return std::max(1.0, dim * std::log(static_cast<double>(n) / delta));
}

}  // namespace copoe
