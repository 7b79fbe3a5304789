#pragma once

#include <Eigen/Dense>

#include "ppse/channel.hpp"
#include "ppse/system.hpp"

namespace ppse::test {

inline Eigen::MatrixXd tank_A() {
  Eigen::MatrixXd A(3, 3);
  A << 0.9889, 0.0001, 0.0110, 0.0001, 0.9774, 0.0119, 0.0110, 0.0119, 0.9770;
  return A;
}

inline Eigen::MatrixXd tank_B() {
  Eigen::MatrixXd B(3, 2);
  B << 64.5993, 0.0015, 0.0015, 64.2236, 0.3604, 0.3910;
  return B;
}

inline SystemModel three_tank() {
  SystemModel m;
  m.A = tank_A();
  m.B = tank_B();
  m.C = Eigen::MatrixXd::Identity(3, 3);
  m.D = tank_B();
  m.E = Eigen::MatrixXd::Identity(3, 3);
  m.Q = 1e-10 * Eigen::MatrixXd::Identity(2, 2);
  m.R = 1e-4 * Eigen::MatrixXd::Identity(3, 3);
  m.u = Eigen::Vector2d(3e-5, 2e-5);
  m.x0_mean = Eigen::Vector3d(0.3, 0.1, 0.2);
  m.P0 = Eigen::MatrixXd::Identity(3, 3);
  return m;
}

inline ChannelModel user_channel() {
  ChannelModel c;
  c.transition.resize(2, 2);
  c.transition << 0.1, 0.9, 0.5, 0.5;
  c.dropout = Eigen::Vector2d(0.7, 0.1);
  return c;
}

inline ChannelModel eve_channel() {
  ChannelModel c;
  c.transition.resize(2, 2);
  c.transition << 0.2, 0.8, 0.4, 0.6;
  c.dropout = Eigen::Vector2d(0.7, 0.1);
  return c;
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace ppse::test
