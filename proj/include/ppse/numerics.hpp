#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "ppse/errors.hpp"

namespace ppse {

// All tolerances and iteration caps used by the fixed-point solvers, in one place.
struct NumericsConfig {
  double psd_tol = 1e-10;         // relative negative-pivot tolerance (cholesky)
  double pivot_tol = 1e-14;       // absolute pivot threshold (mat_inverse)
  double cond_cap = 1e12;         // condition-estimate cap (mat_inverse)
  double dlyap_tol = 1e-13;       // step tolerance relative to 1+norm(X)
  int dlyap_max_iter = 100000;
  double mare_tol = 1e-10;        // step tolerance relative to 1+norm(X)
  int mare_max_iter = 100000;
  double mare_divergence = 1e12;  // norm beyond which the MARE iteration is divergent
  double stability_margin = 1e-9;
  double ergodic_tol = 0.0;       // entries strictly > this count as reachable
};

template <typename Derived>
using MatrixOf = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Derived>
MatrixOf<Derived> sym(const Eigen::MatrixBase<Derived>& m) {
  MatrixOf<Derived> s = m;
  return (s + s.transpose().eval()) / 2;
}

// Cholesky-Banachiewicz with semidefinite handling: a (relatively) zero pivot zeroes
// its column instead of failing, so rank-deficient covariances remain sampleable.
template <typename Derived>
MatrixOf<Derived> cholesky(const Eigen::MatrixBase<Derived>& m_in,
                           const NumericsConfig& cfg = {}) {
  using Scalar = typename Derived::Scalar;
  using Mat = MatrixOf<Derived>;
  Mat m = m_in;
  if (m.rows() != m.cols()) throw InconsistentInput("cholesky: matrix not square");
  const Eigen::Index n = m.rows();
  // The pivot tolerance must track the matrix's own magnitude: clamping the scale
  // at 1 would silently zero out any covariance whose entries sit below psd_tol.
  const Scalar scale = n > 0 ? m.cwiseAbs().maxCoeff() : Scalar(0);
  Mat L = Mat::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Scalar d = m(j, j) - L.row(j).head(j).squaredNorm();
    if (d < -cfg.psd_tol * scale) throw NotPsd("cholesky: negative pivot");
    if (d <= cfg.psd_tol * scale) continue;  // semidefinite direction: column stays zero
    L(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      Scalar s = m(i, j) - L.row(i).head(j).dot(L.row(j).head(j));
      L(i, j) = s / L(j, j);
    }
  }
  return L;
}

template <typename Derived>
MatrixOf<Derived> mat_inverse(const Eigen::MatrixBase<Derived>& m_in,
                              const NumericsConfig& cfg = {}) {
  using Mat = MatrixOf<Derived>;
  Mat m = m_in;
  if (m.rows() != m.cols()) throw InconsistentInput("mat_inverse: matrix not square");
  Eigen::FullPivLU<Mat> lu(m);
  const auto& packed = lu.matrixLU();
  double min_pivot = std::numeric_limits<double>::infinity();
  double max_pivot = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double p = std::abs(static_cast<double>(packed(i, i)));
    min_pivot = std::min(min_pivot, p);
    max_pivot = std::max(max_pivot, p);
  }
  if (m.rows() == 0 || min_pivot < cfg.pivot_tol)
    throw SingularMatrix("mat_inverse: pivot below threshold");
  if (max_pivot / min_pivot > cfg.cond_cap)
    throw SingularMatrix("mat_inverse: condition estimate above cap");
  return lu.inverse();
}

template <typename Derived>
double spectral_norm(const Eigen::MatrixBase<Derived>& m) {
  Eigen::JacobiSVD<MatrixOf<Derived>> svd(m);
  return svd.singularValues().size() > 0 ? static_cast<double>(svd.singularValues()(0)) : 0.0;
}

template <typename Derived>
double spectral_radius(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() != m.cols()) throw InconsistentInput("spectral_radius: matrix not square");
  if (m.rows() == 0) return 0.0;
  Eigen::EigenSolver<MatrixOf<Derived>> es(m, false);
  if (es.info() != Eigen::Success) throw NoConvergence("spectral_radius: eigensolver failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// X = A X A^T + W by fixed-point iteration.
template <typename DA, typename DW>
MatrixOf<DA> solve_dlyap(const Eigen::MatrixBase<DA>& a_in, const Eigen::MatrixBase<DW>& w_in,
                         const NumericsConfig& cfg = {}) {
  using Mat = MatrixOf<DA>;
  Mat A = a_in;
  Mat W = w_in;
  if (A.rows() != A.cols() || W.rows() != W.cols() || A.rows() != W.rows())
    throw InconsistentInput("solve_dlyap: dimension mismatch");
  if (spectral_radius(A) >= 1.0 - cfg.stability_margin)
    throw Unstable("solve_dlyap: spectral radius not below one");
  Mat X = W;
  for (int it = 0; it < cfg.dlyap_max_iter; ++it) {
    Mat Xn = A * X * A.transpose() + W;
    const double step = (Xn - X).norm();
    X = sym(Xn);
    if (step <= cfg.dlyap_tol * (1.0 + X.norm())) return X;
  }
  throw NoConvergence("solve_dlyap: iteration cap reached");
}

enum class MareStatus { Converged, Diverged };

struct MareResult {
  MareStatus status;
  Eigen::MatrixXd fixed_point;  // last iterate when Diverged
  int iterations;
  bool converged() const { return status == MareStatus::Converged; }
};

// One application of g_lambda(X) = A X A^T + Q - lambda A X C^T (C X C^T + R)^-1 C X A^T.
inline Eigen::MatrixXd mare_step(double lambda, const Eigen::MatrixXd& A,
                                 const Eigen::MatrixXd& C, const Eigen::MatrixXd& Q,
                                 const Eigen::MatrixXd& R, const Eigen::MatrixXd& X,
                                 const NumericsConfig& cfg = {}) {
  Eigen::MatrixXd S = C * X * C.transpose() + R;
  Eigen::MatrixXd G = X * C.transpose() * mat_inverse(S, cfg) * C * X;
  return sym(A * (X - lambda * G) * A.transpose() + Q);
}

inline MareResult solve_mare(double lambda, const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                             const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                             const NumericsConfig& cfg = {}) {
  Eigen::MatrixXd X = Q;
  double checkpoint_trace = X.trace();
  const int checkpoint_at = cfg.mare_max_iter / 2;
  for (int it = 1; it <= cfg.mare_max_iter; ++it) {
    Eigen::MatrixXd Xn = mare_step(lambda, A, C, Q, R, X, cfg);
    if (!Xn.allFinite() || Xn.norm() > cfg.mare_divergence)
      return {MareStatus::Diverged, Xn, it};
    const double step = (Xn - X).norm();
    X = Xn;
    if (step <= cfg.mare_tol * (1.0 + X.norm())) return {MareStatus::Converged, X, it};
    if (it == checkpoint_at) checkpoint_trace = X.trace();
  }
  if (X.trace() > checkpoint_trace * (1.0 + 1e-9) + 1e-300)
    return {MareStatus::Diverged, X, cfg.mare_max_iter};
  throw NoConvergence("solve_mare: iteration cap without growth or convergence");
}

// Primitivity test (Wielandt bound): ergodic iff B^((n-1)^2 + 1) is entrywise positive,
// where B is the boolean support of the transition matrix.
inline bool is_ergodic(const Eigen::MatrixXd& P, const NumericsConfig& cfg = {}) {
  if (P.rows() != P.cols() || P.rows() == 0)
    throw InconsistentInput("is_ergodic: matrix not square");
  const Eigen::Index n = P.rows();
  using BMat = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;
  BMat B(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) B(i, j) = P(i, j) > cfg.ergodic_tol;
  const long wielandt = (static_cast<long>(n) - 1) * (static_cast<long>(n) - 1) + 1;
  BMat M = BMat::Identity(n, n);
  for (long p = 0; p < wielandt; ++p) {
    BMat Mn(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        bool acc = false;
        for (Eigen::Index k = 0; k < n && !acc; ++k) acc = M(i, k) && B(k, j);
        Mn(i, j) = acc;
      }
    M = Mn;
  }
  return M.all();
}

// Stationary distribution of a row-stochastic ergodic transition matrix.
inline Eigen::VectorXd steady_state(const Eigen::MatrixXd& P, const NumericsConfig& cfg = {}) {
  if (!is_ergodic(P, cfg)) throw NotErgodic("steady_state: chain is not ergodic");
  const Eigen::Index n = P.rows();
  Eigen::MatrixXd M = P.transpose() - Eigen::MatrixXd::Identity(n, n);
  M.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  Eigen::VectorXd pi = M.fullPivLu().solve(b);
  if ((P.transpose() * pi - pi).norm() > 1e-12)
    throw NoConvergence("steady_state: residual above tolerance");
  return pi;
}

}  // namespace ppse
