#pragma once

#include <Eigen/Dense>

#include "ppse/numerics.hpp"
#include "ppse/rng.hpp"

namespace ppse {

// Linear plant x' = A x (+ B u) (+ D) w,  y = C x (+ E) v.
// B, D, E, u are optional (zero-sized when absent); Q is the covariance of w,
// so with D present the effective process noise reaching the state is D Q D^T.
struct SystemModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd C;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  Eigen::VectorXd x0_mean;
  Eigen::MatrixXd P0;
  Eigen::MatrixXd B;
  Eigen::MatrixXd D;
  Eigen::MatrixXd E;
  Eigen::VectorXd u;

  Eigen::Index nx() const { return A.rows(); }
  Eigen::Index ny() const { return C.rows(); }
  bool has_input() const { return B.size() > 0; }

  Eigen::VectorXd input_drift() const;          // B u, or zero(nx)
  Eigen::MatrixXd process_noise_cov() const;    // D Q D^T, or Q
  Eigen::MatrixXd measurement_noise_cov() const;  // E R E^T, or R
  void validate(const NumericsConfig& cfg = {}) const;
};

struct SystemState {
  int k = 0;
  Eigen::VectorXd x;
};

// Owns the Cholesky factors of the noise covariances and advances the true state.
class Plant {
 public:
  explicit Plant(const SystemModel& model, const NumericsConfig& cfg = {});

  SystemState init_state(Rng& rng) const;  // x0 ~ N(x0_mean, P0)
  SystemState step(const SystemState& s, Rng& rng) const;
  Eigen::VectorXd measure(const SystemState& s, Rng& rng) const;

  const SystemModel& model() const { return *model_; }

 private:
  const SystemModel* model_;
  Eigen::MatrixXd Lq_;   // chol(Q)
  Eigen::MatrixXd Lr_;   // chol(R)
  Eigen::MatrixXd Lp0_;  // chol(P0)
};

}  // namespace ppse
