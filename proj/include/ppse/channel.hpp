#pragma once

#include <Eigen/Dense>
#include <optional>

#include "ppse/numerics.hpp"
#include "ppse/rng.hpp"

namespace ppse {

// Finite-state Markov fading channel: the state evolves as a Markov chain and the
// per-slot packet loss is Bernoulli with a state-conditioned probability.
struct ChannelModel {
  Eigen::MatrixXd transition;  // row-stochastic
  Eigen::VectorXd dropout;     // P{loss | state}
  Eigen::VectorXd initial;     // empty -> stationary distribution
  bool shared_state = false;   // reuse the legitimate chain's state sequence

  int states() const { return static_cast<int>(transition.rows()); }
  void validate(const NumericsConfig& cfg = {}) const;
  Eigen::VectorXd initial_or_stationary(const NumericsConfig& cfg = {}) const;
  Eigen::VectorXd stationary(const NumericsConfig& cfg = {}) const;
};

template <typename Payload>
struct Gated {
  bool received = false;
  std::optional<Payload> payload;
};

template <typename Payload>
Gated<Payload> gate(const Payload& payload, bool gamma) {
  if (gamma) return Gated<Payload>{true, payload};
  return Gated<Payload>{false, std::nullopt};
}

// Per-trial channel simulator. The first next() samples the initial state and draws
// the reception for it; every later next() transitions the state first and then draws
// the reception conditioned on the post-transition state.
class ChannelSim {
 public:
  explicit ChannelSim(const ChannelModel& model, const NumericsConfig& cfg = {});

  bool next(Rng& rng);
  // Mirror another chain's state (shared-state sensitivity option) and draw reception.
  bool next_with_state(int state, Rng& rng);
  int state() const { return theta_; }

 private:
  const ChannelModel* model_;
  Eigen::VectorXd init_dist_;
  int theta_ = -1;
};

}  // namespace ppse
