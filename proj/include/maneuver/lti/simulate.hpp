#pragma once

#include <iosfwd>
#include <vector>

#include "maneuver/lti/closed_loop.hpp"

namespace maneuver::lti {

// Discrete realization of one proper transfer function under the bilinear
// (trapezoidal) map s = (2/dt)(z-1)/(z+1).
class DiscreteBlock {
 public:
  DiscreteBlock(const TransferFunction& tf, double dt);

  double step(double input);
  void reset();

 private:
  std::vector<double> b_;  // input weights,  b_[j] multiplies u[k-j]
  std::vector<double> a_;  // output weights, a_[j] multiplies y[k-j], a_[0]=1
  std::vector<double> past_inputs_;
  std::vector<double> past_outputs_;
};

struct SimTrace {
  std::vector<double> t, r, d, y, u_fb, u_ff;

  double steady_state_y() const;
  void write_csv(std::ostream& os) const;
};

struct SimOptions {
  double dt = 1e-3;
  double divergence_bound = 1e9;
};

// Discretizes the derived closed-loop transfers and superposes their
// responses: y_k = T_r(r)_k + S(d + P u_ff)_k with S the pure-feedback
// sensitivity and u_ff = C_ff(d) fed through a structural plant block, so
// feedforward cancellation happens in the signals instead of inside one
// stiff folded transfer. u_fb = C_fb(r - y) is reconstructed alongside.
// Throws ImproperSystem when any loop component is improper (the ideal
// disturbance inverse lands here), UnstableLoop when |y| or an actuator
// signal crosses the divergence bound.
SimTrace simulate(const ClosedLoopSystem& system, const std::vector<double>& reference,
                  const std::vector<double>& disturbance, const SimOptions& options);

std::vector<double> step_signal(std::size_t horizon, double amplitude = 1.0);
std::vector<double> zero_signal(std::size_t horizon);

}  // namespace maneuver::lti
