#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ppse/channel.hpp"
#include "ppse/codec.hpp"
#include "ppse/numerics.hpp"
#include "ppse/system.hpp"

namespace ppse {

struct BoundednessReport {
  double delta_n = 0.0;       // distortion rate
  double eta_star = 0.0;      // optimized eta = sqrt(delta_n)/s
  double lambda_bar = 0.0;
  double cond_encoder = 0.0;  // delta_n + 2 sqrt(delta_n) at eta*
  double cond_channel = 0.0;  // max_n sum_j mu_j p_nj * |A|^2
  bool encoder_ok = false;    // cond_encoder < 1 - lambda_bar
  bool channel_ok = false;    // cond_channel < 1
  double alpha = 0.0;         // envelope decay rate (= cond_channel); NaN unless both ok
  double beta = 0.0;          // envelope offset; NaN unless both ok
  double u_cal = 0.0;         // d_x * lambda_max of the damped fixed point; NaN unless both ok
};

// Infimum packet-arrival rate admitting a bounded MARE fixed point, by bisection
// to 1e-3; 0 immediately for stable A.
double lambda_bar(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C, const Eigen::MatrixXd& Q,
                  const Eigen::MatrixXd& R, const NumericsConfig& cfg = {});

// Smallest scalar certifying s^2 E[e e^T] <= delta_n * innovation_cov with the
// uniform quantizer bound: s^2 (delta^2/4) / lambda_min(innovation_cov).
double distortion_rate(const PpmParams& params, const Eigen::MatrixXd& innovation_cov,
                       const NumericsConfig& cfg = {});

// max_n sum_j dropout_j p_nj * spectral_norm(A)^2.
double channel_condition(const ChannelModel& channel, const Eigen::MatrixXd& A);

BoundednessReport check_boundedness(const SystemModel& model, const ChannelModel& channel,
                                    const PpmParams& params, const NumericsConfig& cfg = {});

// Error-envelope value alpha^(k-1) tr0 + beta (1 - alpha^(k-1)) / (1 - alpha), k >= 1.
double envelope_at(int k, double alpha, double beta, double trace_sigma0);

// Gain floor lambda_min(Q_eff)^2 lambda_min(C^T C) lambda_max(C P C^T + R_eff)^-2;
// 0 (degenerate) when Q_eff is singular.
double kappa_bar(const SystemModel& model, const Eigen::MatrixXd& P_bound,
                 const NumericsConfig& cfg = {});

// Expected post-event decode bias: entry j (j = 0..horizon-k0-1) is a^j * e_init,
// the mean of the biased chain at time k0+1+j with the noise terms at their zero mean.
std::vector<Eigen::VectorXd> bias_curve(double a, double s, int k0, int horizon,
                                        const Eigen::VectorXd& e_init);

}  // namespace ppse
