#include "ppse/analysis.hpp"

#include <cmath>
#include <limits>

namespace ppse {

namespace {

double lambda_min_sym(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym(m));
  return es.eigenvalues().minCoeff();
}

double lambda_max_sym(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym(m));
  return es.eigenvalues().maxCoeff();
}

bool mare_feasible(double lambda, const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                   const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                   const NumericsConfig& cfg) {
  try {
    return solve_mare(lambda, A, C, Q, R, cfg).converged();
  } catch (const NoConvergence&) {
    return false;  // stall near the boundary: classify conservatively as infeasible
  }
}

}  // namespace

double lambda_bar(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C, const Eigen::MatrixXd& Q,
                  const Eigen::MatrixXd& R, const NumericsConfig& cfg) {
  if (spectral_radius(A) < 1.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  if (!mare_feasible(hi, A, C, Q, R, cfg))
    throw NoConvergence("lambda_bar: no bounded fixed point even at lambda = 1");
  while (hi - lo > 1e-3) {
    const double mid = 0.5 * (lo + hi);
    if (mare_feasible(mid, A, C, Q, R, cfg))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double distortion_rate(const PpmParams& params, const Eigen::MatrixXd& innovation_cov,
                       const NumericsConfig& cfg) {
  params.validate();
  const double lmin = lambda_min_sym(innovation_cov);
  if (lmin <= cfg.psd_tol * (1.0 + innovation_cov.norm()))
    throw NotPsd("distortion_rate: innovation covariance must be positive definite");
  return params.s * params.s * (params.delta * params.delta / 4.0) / lmin;
}

double channel_condition(const ChannelModel& channel, const Eigen::MatrixXd& A) {
  const Eigen::VectorXd loss_after = channel.transition * channel.dropout;
  const double norm_a = spectral_norm(A);
  return loss_after.maxCoeff() * norm_a * norm_a;
}

double envelope_at(int k, double alpha, double beta, double trace_sigma0) {
  const double decay = std::pow(alpha, k - 1);
  return decay * trace_sigma0 + beta * (1.0 - decay) / (1.0 - alpha);
}

BoundednessReport check_boundedness(const SystemModel& model, const ChannelModel& channel,
                                    const PpmParams& params, const NumericsConfig& cfg) {
  const Eigen::MatrixXd Q_eff = model.process_noise_cov();
  const Eigen::MatrixXd R_eff = model.measurement_noise_cov();

  BoundednessReport report;
  report.lambda_bar = lambda_bar(model.A, model.C, Q_eff, R_eff, cfg);

  const MareResult ideal = solve_mare(1.0, model.A, model.C, Q_eff, R_eff, cfg);
  if (!ideal.converged())
    throw NoConvergence("check_boundedness: ideal-channel steady state does not exist");
  const Eigen::MatrixXd innovation_cov =
      sym(Eigen::MatrixXd(model.C * ideal.fixed_point * model.C.transpose() + R_eff));

  report.delta_n = distortion_rate(params, innovation_cov, cfg);
  report.eta_star = std::sqrt(report.delta_n) / params.s;
  report.cond_encoder = report.delta_n + 2.0 * std::sqrt(report.delta_n);
  report.cond_channel = channel_condition(channel, model.A);
  report.encoder_ok = report.cond_encoder < 1.0 - report.lambda_bar;
  report.channel_ok = report.cond_channel < 1.0;

  const double nan = std::numeric_limits<double>::quiet_NaN();
  report.alpha = nan;
  report.beta = nan;
  report.u_cal = nan;
  if (report.encoder_ok && report.channel_ok) {
    const double lambda_damped = 1.0 - report.cond_encoder;
    const MareResult damped = solve_mare(lambda_damped, model.A, model.C, Q_eff, R_eff, cfg);
    if (!damped.converged())
      throw NoConvergence("check_boundedness: damped fixed point does not exist");
    report.u_cal = static_cast<double>(model.nx()) * lambda_max_sym(damped.fixed_point);
    report.alpha = report.cond_channel;
    const Eigen::VectorXd loss_after = channel.transition * channel.dropout;
    report.beta = loss_after.maxCoeff() * Q_eff.trace() + report.u_cal;
  }
  return report;
}

double kappa_bar(const SystemModel& model, const Eigen::MatrixXd& P_bound,
                 const NumericsConfig& cfg) {
  const Eigen::MatrixXd Q_eff = model.process_noise_cov();
  const double q_min = lambda_min_sym(Q_eff);
  if (q_min <= cfg.psd_tol * (1.0 + Q_eff.norm())) return 0.0;  // degenerate
  const double c_min = lambda_min_sym(model.C.transpose() * model.C);
  const Eigen::MatrixXd S =
      model.C * P_bound * model.C.transpose() + model.measurement_noise_cov();
  const double s_max = lambda_max_sym(S);
  return q_min * q_min * c_min / (s_max * s_max);
}

std::vector<Eigen::VectorXd> bias_curve(double a, double s, int k0, int horizon,
                                        const Eigen::VectorXd& e_init) {
  (void)s;
  if (horizon <= k0) throw InconsistentInput("bias_curve: horizon must exceed the event time");
  std::vector<Eigen::VectorXd> curve;
  curve.reserve(horizon - k0);
  for (int k = k0 + 1; k <= horizon; ++k)
    curve.push_back(power_gap(a, k - k0 - 1) * e_init);
  return curve;
}

}  // namespace ppse
