#pragma once

#include <Eigen/Dense>
#include <optional>

#include "ppse/numerics.hpp"
#include "ppse/system.hpp"

namespace ppse {

struct FilterState {
  int k = 0;
  Eigen::VectorXd x_hat;
  Eigen::MatrixXd P;
};

struct PredictedState {
  Eigen::VectorXd x_pred;
  Eigen::MatrixXd P_pred;
};

struct GainReport {
  Eigen::MatrixXd K;
  Eigen::MatrixXd S;  // C P C^T + R
};

FilterState initial_filter_state(const SystemModel& model);

// x_pred = A x_hat (+ B u); P_pred = A P A^T + Q_eff. Throws Overflow past 1e30.
PredictedState predict(const SystemModel& model, const FilterState& fs,
                       const NumericsConfig& cfg = {});

// K = P C^T (C P C^T + R)^-1; R here is the effective measurement covariance.
GainReport gain(const SystemModel& model, const PredictedState& ps,
                const NumericsConfig& cfg = {});

// Gated update with a decoded innovation. gamma = 0 keeps the prediction; gamma = 1
// applies x = x_pred + K eps_bar and P = P_pred - K S K^T + s^2 K R_e K^T.
FilterState update(const SystemModel& model, const PredictedState& ps, bool gamma,
                   const std::optional<Eigen::VectorXd>& eps_bar, const Eigen::MatrixXd& R_e,
                   double s, int k, const NumericsConfig& cfg = {});

// Textbook Kalman update with a raw measurement (baseline oracle).
FilterState kf_reference_update(const SystemModel& model, const PredictedState& ps,
                                const Eigen::VectorXd& y, int k,
                                const NumericsConfig& cfg = {});

}  // namespace ppse
