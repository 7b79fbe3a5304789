#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "ppse/numerics.hpp"
#include "ppse/rng.hpp"

namespace ppse {

// Innovation-encoding mechanism parameters: payload is the stochastically quantized
// value of (eps - a^gap * eps_ref) / s on the grid {d*delta, d integer}.
struct PpmParams {
  double a = 2.0;
  double s = 1.0;
  double delta = 0.01;
  void validate() const;
};

using Levels = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

struct EncodedPacket {
  Levels levels;
  double step = 0.0;  // quantizer step echoed for integrity

  Eigen::VectorXd values() const { return levels.cast<double>() * step; }
};

// (t_ref, eps_ref): time and value of the last successfully decoded innovation.
struct ReferenceChain {
  int t_ref = -1;
  Eigen::VectorXd eps_ref;
  bool initialized() const { return t_ref >= 0; }
};

// a^gap with a log-space guard; gap >= 0.
double power_gap(double a, int gap);

EncodedPacket quantize(const Eigen::VectorXd& v, double delta, Rng& rng);

EncodedPacket encode(const Eigen::VectorXd& eps, const ReferenceChain& chain,
                     const PpmParams& params, int k, Rng& rng);

Eigen::VectorXd decode(const EncodedPacket& pkt, const ReferenceChain& chain,
                       const PpmParams& params, int k);

void update_reference(ReferenceChain& chain, bool gamma, const Eigen::VectorXd& eps_bar, int k);

// Conservative per-coordinate quantization-noise bound fed to the filter.
Eigen::MatrixXd decode_error_cov_bound(const PpmParams& params, Eigen::Index dy);

// --- state-forwarding baselines ---

enum class SscVariant { I, II };

// SSC-I: L = A. SSC-II: L = P_L (P_L A^T)^-1 with P_L the open-loop Lyapunov fixed point
// for effective process noise W.
Eigen::MatrixXd ssc_weight(SscVariant variant, const Eigen::MatrixXd& A, const Eigen::MatrixXd& W,
                           const NumericsConfig& cfg = {});

struct SscParams {
  Eigen::MatrixXd L;
  bool compensate_input = false;  // include sum_{i<gap} L^i * drift in payload/decode
};

struct StateChain {
  int t_ref = -1;
  Eigen::VectorXd x_ref;
  bool initialized() const { return t_ref >= 0; }
};

Eigen::VectorXd ssc_encode(const Eigen::VectorXd& x_hat, const StateChain& chain,
                           const SscParams& params, const Eigen::VectorXd& drift, int k);

Eigen::VectorXd ssc_decode(const Eigen::VectorXd& z, const StateChain& chain,
                           const SscParams& params, const Eigen::VectorXd& drift, int k);

void ssc_update_reference(StateChain& chain, bool gamma, const Eigen::VectorXd& x_bar, int k);

// Withholding policy: transmit the raw measurement with probability lambda_hat.
bool smfsmc_sends(double lambda_hat, Rng& rng);

}  // namespace ppse
