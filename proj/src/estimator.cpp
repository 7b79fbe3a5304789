#include "ppse/estimator.hpp"

namespace ppse {

FilterState initial_filter_state(const SystemModel& model) {
  FilterState fs;
  fs.k = 0;
  fs.x_hat = model.x0_mean;
  fs.P = model.P0;
  return fs;
}

PredictedState predict(const SystemModel& model, const FilterState& fs,
                       const NumericsConfig& cfg) {
  (void)cfg;
  PredictedState ps;
  ps.x_pred = model.A * fs.x_hat;
  if (model.has_input()) ps.x_pred += model.B * model.u;
  ps.P_pred = sym(Eigen::MatrixXd(model.A * fs.P * model.A.transpose() +
                                  model.process_noise_cov()));
  if (!ps.x_pred.allFinite() || ps.x_pred.norm() > 1e30)
    throw Overflow("estimator: prediction overflow");
  return ps;
}

GainReport gain(const SystemModel& model, const PredictedState& ps, const NumericsConfig& cfg) {
  GainReport g;
  g.S = sym(Eigen::MatrixXd(model.C * ps.P_pred * model.C.transpose() +
                            model.measurement_noise_cov()));
  g.K = ps.P_pred * model.C.transpose() * mat_inverse(g.S, cfg);
  return g;
}

FilterState update(const SystemModel& model, const PredictedState& ps, bool gamma,
                   const std::optional<Eigen::VectorXd>& eps_bar, const Eigen::MatrixXd& R_e,
                   double s, int k, const NumericsConfig& cfg) {
  if (gamma != eps_bar.has_value())
    throw InconsistentInput("estimator: decoded innovation must be present iff received");
  FilterState fs;
  fs.k = k;
  if (!gamma) {
    fs.x_hat = ps.x_pred;
    fs.P = ps.P_pred;
    return fs;
  }
  const GainReport g = gain(model, ps, cfg);
  fs.x_hat = ps.x_pred + g.K * (*eps_bar);
  fs.P = sym(Eigen::MatrixXd(ps.P_pred - g.K * g.S * g.K.transpose() +
                             (s * s) * g.K * R_e * g.K.transpose()));
  if (!fs.x_hat.allFinite() || fs.x_hat.norm() > 1e30)
    throw Overflow("estimator: update overflow");
  return fs;
}

FilterState kf_reference_update(const SystemModel& model, const PredictedState& ps,
                                const Eigen::VectorXd& y, int k, const NumericsConfig& cfg) {
  const GainReport g = gain(model, ps, cfg);
  FilterState fs;
  fs.k = k;
  fs.x_hat = ps.x_pred + g.K * (y - model.C * ps.x_pred);
  fs.P = sym(Eigen::MatrixXd(ps.P_pred - g.K * g.S * g.K.transpose()));
  if (!fs.x_hat.allFinite() || fs.x_hat.norm() > 1e30)
    throw Overflow("estimator: update overflow");
  return fs;
}

}  // namespace ppse
