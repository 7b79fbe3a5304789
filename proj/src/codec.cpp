#include "ppse/codec.hpp"

#include <cmath>

namespace ppse {

void PpmParams::validate() const {
  if (!(a > 0.0)) throw InconsistentInput("codec: scaling parameter a must be positive");
  if (s == 0.0) throw InconsistentInput("codec: scale s must be nonzero");
  if (!(delta > 0.0)) throw InconsistentInput("codec: quantizer step delta must be positive");
}

double power_gap(double a, int gap) {
  if (gap < 0) throw InconsistentInput("codec: negative reference gap");
  if (gap == 0) return 1.0;
  if (a > 1.0 && gap * std::log10(a) > 300.0)
    throw Overflow("codec: reference weight a^gap beyond 1e300");
  return std::pow(a, gap);
}

EncodedPacket quantize(const Eigen::VectorXd& v, double delta, Rng& rng) {
  if (!(delta > 0.0)) throw InconsistentInput("codec: quantizer step delta must be positive");
  if (!v.allFinite()) throw Overflow("codec: non-finite quantizer input");
  constexpr double kLevelCap = 4.611686018427388e18;  // 2^62
  EncodedPacket pkt;
  pkt.step = delta;
  pkt.levels.resize(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const double x = v(j) / delta;
    if (std::abs(x) > kLevelCap) throw Overflow("codec: quantizer level beyond 2^62");
    double d = std::floor(x);
    const double q = x - d;
    if (q > 0.0 && rng.uniform() < q) d += 1.0;
    pkt.levels(j) = static_cast<std::int64_t>(d);
  }
  return pkt;
}

namespace {

Eigen::VectorXd reference_value(const ReferenceChain& chain, const PpmParams& params, int k,
                                Eigen::Index dy) {
  if (!chain.initialized()) return Eigen::VectorXd::Zero(dy);
  return power_gap(params.a, k - chain.t_ref) * chain.eps_ref;
}

}  // namespace

EncodedPacket encode(const Eigen::VectorXd& eps, const ReferenceChain& chain,
                     const PpmParams& params, int k, Rng& rng) {
  params.validate();
  if (chain.initialized() && chain.t_ref >= k)
    throw InconsistentInput("codec: reference chain is not in the past");
  const Eigen::VectorXd ref = reference_value(chain, params, k, eps.size());
  return quantize((eps - ref) / params.s, params.delta, rng);
}

Eigen::VectorXd decode(const EncodedPacket& pkt, const ReferenceChain& chain,
                       const PpmParams& params, int k) {
  params.validate();
  if (chain.initialized() && chain.t_ref >= k)
    throw InconsistentInput("codec: reference chain is not in the past");
  return pkt.values() * params.s + reference_value(chain, params, k, pkt.levels.size());
}

void update_reference(ReferenceChain& chain, bool gamma, const Eigen::VectorXd& eps_bar, int k) {
  if (!gamma) return;
  chain.t_ref = k;
  chain.eps_ref = eps_bar;
}

Eigen::MatrixXd decode_error_cov_bound(const PpmParams& params, Eigen::Index dy) {
  return (params.delta * params.delta / 4.0) * Eigen::MatrixXd::Identity(dy, dy);
}

Eigen::MatrixXd ssc_weight(SscVariant variant, const Eigen::MatrixXd& A, const Eigen::MatrixXd& W,
                           const NumericsConfig& cfg) {
  if (variant == SscVariant::I) return A;
  const Eigen::MatrixXd P_L = solve_dlyap(A, W, cfg);
  return P_L * mat_inverse(Eigen::MatrixXd(P_L * A.transpose()), cfg);
}

namespace {

// L^gap x_ref plus, when enabled, the accumulated deterministic input sum_{i<gap} L^i drift.
Eigen::VectorXd ssc_reference(const StateChain& chain, const SscParams& params,
                              const Eigen::VectorXd& drift, int k) {
  const int gap = k - chain.t_ref;
  if (gap <= 0) throw InconsistentInput("codec: state chain is not in the past");
  Eigen::VectorXd acc = chain.x_ref;
  Eigen::VectorXd comp = Eigen::VectorXd::Zero(drift.size());
  for (int i = 0; i < gap; ++i) {
    if (params.compensate_input) comp = params.L * comp + drift;
    acc = params.L * acc;
  }
  if (!acc.allFinite()) throw Overflow("codec: state reference overflow");
  return params.compensate_input ? Eigen::VectorXd(acc + comp) : acc;
}

}  // namespace

Eigen::VectorXd ssc_encode(const Eigen::VectorXd& x_hat, const StateChain& chain,
                           const SscParams& params, const Eigen::VectorXd& drift, int k) {
  if (!chain.initialized()) return x_hat;
  return x_hat - ssc_reference(chain, params, drift, k);
}

Eigen::VectorXd ssc_decode(const Eigen::VectorXd& z, const StateChain& chain,
                           const SscParams& params, const Eigen::VectorXd& drift, int k) {
  if (!chain.initialized()) return z;
  return z + ssc_reference(chain, params, drift, k);
}

void ssc_update_reference(StateChain& chain, bool gamma, const Eigen::VectorXd& x_bar, int k) {
  if (!gamma) return;
  chain.t_ref = k;
  chain.x_ref = x_bar;
}

bool smfsmc_sends(double lambda_hat, Rng& rng) {
  if (lambda_hat < 0.0 || lambda_hat > 1.0)
    throw InconsistentInput("codec: transmit probability must lie in [0, 1]");
  return rng.bernoulli(lambda_hat);
}

}  // namespace ppse
