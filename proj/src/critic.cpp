#include "copoe/critic.hpp"

#include <algorithm>
#include <cmath>

#include "copoe/errors.hpp"

namespace copoe {

BallConstrainedLs::BallConstrainedLs(const Eigen::MatrixXd& gram, double ridge) : ridge_(ridge) {
  if (gram.rows() != gram.cols() || gram.rows() < 1) throw ParameterError("Gram matrix must be square");
  if (ridge < 0.0) throw ParameterError("ridge must be nonnegative");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (gram + gram.transpose()));
  eigenvectors_ = eig.eigenvectors();
  eigenvalues_ = eig.eigenvalues().cwiseMax(0.0).array() + ridge;
  const double top = eigenvalues_.maxCoeff();
  cutoff_ = ridge > 0.0 ? 0.0 : 1e-13 * std::max(top, 1e-300);
}

Eigen::VectorXd BallConstrainedLs::weights_for(const Eigen::VectorXd& z, double mu) const {
  Eigen::VectorXd scaled(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double denom = eigenvalues_(i) + mu;
    scaled(i) = (mu == 0.0 && eigenvalues_(i) <= cutoff_) ? 0.0 : z(i) / denom;
  }
  return eigenvectors_ * scaled;
}

BallLsResult BallConstrainedLs::solve(const Eigen::VectorXd& rhs, double W) const {
  if (rhs.size() != eigenvalues_.size()) throw ParameterError("rhs dimension mismatch");
  if (!(W > 0.0)) throw ParameterError("norm cap W must be positive");
  const Eigen::VectorXd z = eigenvectors_.transpose() * rhs;
  BallLsResult out;
  out.w = weights_for(z, 0.0);
  if (out.w.norm() <= W) return out;

  auto norm_at = [&](double mu) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double v = z(i) / (eigenvalues_(i) + mu);
      s += v * v;
    }
    return std::sqrt(s);
  };
  double lo = 0.0;
  double hi = z.norm() / W;  // ||w(mu)|| <= ||z|| / mu
  while (norm_at(hi) > W) hi *= 2.0;
  while (hi - lo > 1e-10 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (norm_at(mid) > W)
      lo = mid;
    else
      hi = mid;
  }
  out.w = weights_for(z, hi);
  out.multiplier = hi;
  out.constraint_active = true;
  return out;
}

double importance_ratio(const LinearMdp& mdp, const std::vector<StateAction>& path,
                        const StochasticPolicy& target, const StochasticPolicy& behavior) {
  constexpr int kStack = 16;
  const auto A = static_cast<std::size_t>(mdp.num_actions());
  std::vector<double> heap_t, heap_b;
  double stack_t[kStack], stack_b[kStack];
  std::span<double> pt(stack_t, A), pb(stack_b, A);
  if (A > kStack) {
    heap_t.resize(A);
    heap_b.resize(A);
    pt = heap_t;
    pb = heap_b;
  }
  double rho = 1.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const auto [s, a] = path[i];
    behavior.action_probs(mdp, s, pb);
    const double den = pb[static_cast<std::size_t>(a)];
    if (!(den > 0.0))
      throw DegenerateSupportError("behavior policy has zero probability on a stored action");
    target.action_probs(mdp, s, pt);
    rho *= pt[static_cast<std::size_t>(a)] / den;
  }
  return rho;
}

namespace {

Eigen::MatrixXd stack_features(const Dataset& data, int dim) {
  if (data.records.empty()) throw ParameterError("critic fit needs a nonempty dataset");
  Eigen::MatrixXd x(static_cast<Eigen::Index>(data.records.size()), dim);
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    if (data.records[i].phi1.size() != dim) throw ParameterError("record feature dimension mismatch");
    x.row(static_cast<Eigen::Index>(i)) = data.records[i].phi1.transpose();
  }
  return x;
}

}  // namespace

CriticDesign::CriticDesign(const Dataset& data, int dim, double ridge)
    : x_(stack_features(data, dim)), solver_(x_.transpose() * x_, ridge), bonus_tag_(data.bonus_tag) {}

CriticFit fit(const CriticDesign& design, const Dataset& data, const LinearMdp& mdp,
              const StochasticPolicy& behavior, const StochasticPolicy& target, double W,
              const CriticOptions& options) {
  if (data.records.empty()) throw ParameterError("critic fit needs a nonempty dataset");
  if (design.num_records() != data.records.size())
    throw ConsistencyError("critic design was built from a different dataset");
  if (!(W > 0.0)) throw ParameterError("norm cap W must be positive");

  CriticFit out;
  out.w_norm_cap = W;
  out.num_records = static_cast<long>(data.records.size());
  out.snapshot_id = data.bonus_tag;
  out.ratios.reserve(data.records.size());
  Eigen::VectorXd y(static_cast<Eigen::Index>(data.records.size()));
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    const auto& rec = data.records[i];
    double rho = importance_ratio(mdp, rec.path, target, behavior);
    out.ratios.push_back(rho);
    out.max_ratio = std::max(out.max_ratio, rho);
    out.ratios_above_two += rho > 2.0;
    if (options.ratio_cap > 0.0 && rho > options.ratio_cap) {
      ++out.would_clip;
      rho = options.ratio_cap;
    }
    y(static_cast<Eigen::Index>(i)) = rho * rec.g_return;
  }
  const Eigen::MatrixXd& x = design.features();
  const BallLsResult sol = design.solver().solve(x.transpose() * y, W);
  out.w_hat = sol.w;
  out.constraint_active = sol.constraint_active;
  out.mean_sq_residual = (x * sol.w - y).squaredNorm() / static_cast<double>(y.size());
  return out;
}

CriticFit fit(const Dataset& data, const LinearMdp& mdp, const StochasticPolicy& behavior,
              const StochasticPolicy& target, double W, const CriticOptions& options) {
  const CriticDesign design(data, mdp.feature_dim(), options.ridge);
  return fit(design, data, mdp, behavior, target, W, options);
}

double q_hat(const CriticFit& fit, const GeometrySnapshot& snapshot, const LinearMdp& mdp,
             StateId s, ActionId a) {
  if (!mdp.valid_pair(s, a)) throw ParameterError("q_hat: invalid state-action index");
  if (fit.snapshot_id != snapshot.id()) throw ConsistencyError("critic fit and snapshot disagree");
  if (snapshot.known_state(s) && snapshot.known_pair(s, a))
    return mdp.phi(s, a).dot(fit.w_hat) + snapshot.bonus_phi(s, a);
  return snapshot.bonus(s, a);
}

}  // namespace copoe
