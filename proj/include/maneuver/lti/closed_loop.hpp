#pragma once

#include <optional>

#include "maneuver/lti/transfer_function.hpp"

namespace maneuver::lti {

// One SISO loop: plant under negative feedback, with an optional
// feed-forward controller acting on the measured disturbance.
struct ClosedLoopSystem {
  TransferFunction plant;
  TransferFunction feedback_controller;
  std::optional<TransferFunction> feedforward_controller;
};

struct ClosedLoopTransfer {
  TransferFunction from_reference;   // P*C_fb / (1 + P*C_fb)
  TransferFunction from_disturbance; // 1/(1+P*C_fb), or (1+P*C_ff)/(1+P*C_fb)
};

// Derives both closed-loop paths. from_reference and the pure-feedback
// from_disturbance share one denominator vector so the sensitivity identity
// from_r + from_d = 1 holds at coefficient level on exact fixtures.
// Throws IllPosedLoop when 1 + P*C_fb is identically zero.
ClosedLoopTransfer closed_loop(const ClosedLoopSystem& system);

// The exact disturbance canceller -1/P. May be improper; simulate() rejects
// improper blocks, the algebra does not.
TransferFunction ideal_feedforward(const TransferFunction& plant);

// Proper approximation -(1/P) * 1/(eps*s + 1)^k with the smallest k that
// makes the result proper. At s=0 it still matches -1/P(0) exactly.
TransferFunction proper_feedforward(const TransferFunction& plant, double epsilon);

}  // namespace maneuver::lti
