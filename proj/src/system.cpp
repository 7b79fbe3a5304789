#include "ppse/system.hpp"

#include <string>

namespace ppse {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InconsistentInput(what);
}

bool symmetric_within(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = 1.0 + m.norm();
  return (m - m.transpose()).norm() <= rel_tol * scale;
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym(m));
  return es.eigenvalues().minCoeff();
}

}  // namespace

Eigen::VectorXd SystemModel::input_drift() const {
  if (!has_input()) return Eigen::VectorXd::Zero(nx());
  return B * u;
}

Eigen::MatrixXd SystemModel::process_noise_cov() const {
  if (D.size() > 0) return D * Q * D.transpose();
  return Q;
}

Eigen::MatrixXd SystemModel::measurement_noise_cov() const {
  if (E.size() > 0) return E * R * E.transpose();
  return R;
}

void SystemModel::validate(const NumericsConfig& cfg) const {
  const Eigen::Index dx = A.rows();
  require(dx >= 1 && A.cols() == dx, "system: A must be square and nonempty");
  require(C.rows() >= 1 && C.cols() == dx, "system: C column count must match the state dimension");
  const Eigen::Index dy = C.rows();
  require(R.rows() == dy && R.cols() == dy, "system: R must be d_y x d_y");
  require(x0_mean.size() == dx, "system: x0 length must match the state dimension");
  require(P0.rows() == dx && P0.cols() == dx, "system: P0 must be d_x x d_x");
  if (D.size() > 0) {
    require(D.rows() == dx, "system: D row count must match the state dimension");
    require(Q.rows() == D.cols() && Q.cols() == D.cols(),
            "system: Q must match the noise dimension implied by D");
  } else {
    require(Q.rows() == dx && Q.cols() == dx, "system: Q must be d_x x d_x when D is absent");
  }
  if (E.size() > 0) require(E.rows() == dy && E.cols() == dy, "system: E must be d_y x d_y");
  if (B.size() > 0) {
    require(B.rows() == dx, "system: B row count must match the state dimension");
    require(u.size() == B.cols(), "system: u length must match the input dimension");
  } else {
    require(u.size() == 0, "system: u given without B");
  }

  require(A.allFinite() && C.allFinite() && Q.allFinite() && R.allFinite() && P0.allFinite() &&
              x0_mean.allFinite() && (B.size() == 0 || B.allFinite()) &&
              (D.size() == 0 || D.allFinite()) && (E.size() == 0 || E.allFinite()) &&
              (u.size() == 0 || u.allFinite()),
          "system: entries must be finite");

  require(symmetric_within(Q, 1e-10), "system: Q must be symmetric");
  require(symmetric_within(R, 1e-10), "system: R must be symmetric");
  require(symmetric_within(P0, 1e-10), "system: P0 must be symmetric");
  const double q_scale = 1.0 + Q.norm();
  const double p_scale = 1.0 + P0.norm();
  if (min_eigenvalue(Q) < -cfg.psd_tol * q_scale) throw NotPsd("system: Q is not PSD");
  if (min_eigenvalue(P0) < -cfg.psd_tol * p_scale) throw NotPsd("system: P0 is not PSD");
  if (min_eigenvalue(R) <= 0.0) throw NotPsd("system: R must be positive definite");

  // Observability of (A, C): the stacked observability matrix must have full column rank.
  Eigen::MatrixXd obs(dy * dx, dx);
  Eigen::MatrixXd block = C;
  for (Eigen::Index i = 0; i < dx; ++i) {
    obs.middleRows(i * dy, dy) = block;
    block = block * A;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(obs);
  require(qr.rank() == dx, "system: (A, C) is not observable");
}

Plant::Plant(const SystemModel& model, const NumericsConfig& cfg) : model_(&model) {
  model.validate(cfg);
  Lq_ = cholesky(model.Q, cfg);
  Lr_ = cholesky(model.R, cfg);
  Lp0_ = cholesky(model.P0, cfg);
}

SystemState Plant::init_state(Rng& rng) const {
  SystemState s;
  s.k = 0;
  s.x = model_->x0_mean + Lp0_ * rng.gaussian_vector(model_->nx());
  return s;
}

SystemState Plant::step(const SystemState& s, Rng& rng) const {
  const SystemModel& m = *model_;
  Eigen::VectorXd w = Lq_ * rng.gaussian_vector(Lq_.cols());
  SystemState out;
  out.k = s.k + 1;
  out.x = m.A * s.x;
  if (m.has_input()) out.x += m.B * m.u;
  if (m.D.size() > 0)
    out.x += m.D * w;
  else
    out.x += w;
  if (!out.x.allFinite() || out.x.norm() > 1e30) throw Overflow("system: state overflow");
  return out;
}

Eigen::VectorXd Plant::measure(const SystemState& s, Rng& rng) const {
  const SystemModel& m = *model_;
  Eigen::VectorXd v = Lr_ * rng.gaussian_vector(Lr_.cols());
  if (m.E.size() > 0) return m.C * s.x + m.E * v;
  return m.C * s.x + v;
}

}  // namespace ppse
