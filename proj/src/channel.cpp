#include "ppse/channel.hpp"

#include <string>

namespace ppse {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InconsistentInput(what);
}

}  // namespace

void ChannelModel::validate(const NumericsConfig& cfg) const {
  const Eigen::Index n = transition.rows();
  require(n >= 1 && transition.cols() == n, "channel: transition matrix must be square");
  require(transition.allFinite(), "channel: transition entries must be finite");
  for (Eigen::Index i = 0; i < n; ++i) {
    require(transition.row(i).minCoeff() >= 0.0 && transition.row(i).maxCoeff() <= 1.0,
            "channel: transition entries must lie in [0, 1]");
    require(std::abs(transition.row(i).sum() - 1.0) <= 1e-12,
            "channel: transition row " + std::to_string(i) + " does not sum to 1");
  }
  require(dropout.size() == n, "channel: dropout length must match the state count");
  require(dropout.allFinite() && dropout.minCoeff() >= 0.0 && dropout.maxCoeff() <= 1.0,
          "channel: dropout probabilities must lie in [0, 1]");
  if (initial.size() > 0) {
    require(initial.size() == n, "channel: initial distribution length must match the state count");
    require(initial.minCoeff() >= 0.0 && std::abs(initial.sum() - 1.0) <= 1e-9,
            "channel: initial distribution must be a probability vector");
  }
  if (!is_ergodic(transition, cfg)) throw NotErgodic("channel: chain is not ergodic");
}

Eigen::VectorXd ChannelModel::stationary(const NumericsConfig& cfg) const {
  return steady_state(transition, cfg);
}

Eigen::VectorXd ChannelModel::initial_or_stationary(const NumericsConfig& cfg) const {
  if (initial.size() > 0) return initial;
  return stationary(cfg);
}

ChannelSim::ChannelSim(const ChannelModel& model, const NumericsConfig& cfg)
    : model_(&model), init_dist_(model.initial_or_stationary(cfg)) {}

bool ChannelSim::next(Rng& rng) {
  if (theta_ < 0)
    theta_ = rng.categorical(init_dist_);
  else
    theta_ = rng.categorical(model_->transition.row(theta_).transpose());
  return !rng.bernoulli(model_->dropout(theta_));
}

bool ChannelSim::next_with_state(int state, Rng& rng) {
  theta_ = state;
  return !rng.bernoulli(model_->dropout(theta_));
}

}  // namespace ppse
