#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "maneuver/lti/simulate.hpp"
#include "maneuver/util/strings.hpp"

namespace maneuver::lti {

namespace {

void strip_leading_zeros(std::vector<double>& poly) {
  while (poly.size() > 1 && poly.back() == 0.0) poly.pop_back();
}

bool identically_zero(const std::vector<double>& poly) {
  for (double c : poly) {
    if (c != 0.0) return false;
  }
  return true;
}

std::string poly_to_string(const std::vector<double>& poly) {
  std::ostringstream os;
  bool first = true;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    if (poly[i] == 0.0 && poly.size() > 1) continue;
    if (!first) os << " + ";
    os << poly[i];
    if (i == 1) os << "s";
    if (i > 1) os << "s^" << i;
    first = false;
  }
  if (first) os << "0";
  return os.str();
}

}  // namespace

std::vector<double> poly_add(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return out;
}

std::vector<double> poly_scale(const std::vector<double>& a, double factor) {
  std::vector<double> out = a;
  for (double& c : out) c *= factor;
  return out;
}

std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

TransferFunction::TransferFunction(std::vector<double> num, std::vector<double> den)
    : numerator(std::move(num)), denominator(std::move(den)) {
  if (numerator.empty()) numerator = {0.0};
  if (denominator.empty() || identically_zero(denominator)) {
    throw Error("transfer function: denominator is identically zero");
  }
  strip_leading_zeros(numerator);
  strip_leading_zeros(denominator);
  double lead = denominator.back();
  if (lead != 1.0) {
    for (double& c : numerator) c /= lead;
    for (double& c : denominator) c /= lead;
    denominator.back() = 1.0;  // clamp away the division's rounding residue
  }
}

TransferFunction TransferFunction::constant(double value) {
  return TransferFunction({value}, {1.0});
}

bool TransferFunction::zero_numerator() const {
  return identically_zero(numerator);
}

std::complex<double> TransferFunction::evaluate(std::complex<double> s) const {
  auto horner = [&s](const std::vector<double>& poly) {
    std::complex<double> acc{0.0, 0.0};
    for (auto it = poly.rbegin(); it != poly.rend(); ++it) acc = acc * s + *it;
    return acc;
  };
  return horner(numerator) / horner(denominator);
}

double TransferFunction::evaluate_real(double s) const {
  return evaluate({s, 0.0}).real();
}

std::string TransferFunction::describe() const {
  return util::cat("(", poly_to_string(numerator), ") / (", poly_to_string(denominator), ")");
}

TransferFunction add(const TransferFunction& a, const TransferFunction& b) {
  return {poly_add(poly_mul(a.numerator, b.denominator), poly_mul(b.numerator, a.denominator)),
          poly_mul(a.denominator, b.denominator)};
}

TransferFunction multiply(const TransferFunction& a, const TransferFunction& b) {
  return {poly_mul(a.numerator, b.numerator), poly_mul(a.denominator, b.denominator)};
}

TransferFunction invert(const TransferFunction& tf) {
  if (tf.zero_numerator()) throw NotInvertible("cannot invert a zero transfer function");
  return {tf.denominator, tf.numerator};
}

TransferFunction negate(const TransferFunction& tf) {
  return {poly_scale(tf.numerator, -1.0), tf.denominator};
}

// ---- closed-loop derivations -------------------------------------------------

ClosedLoopTransfer closed_loop(const ClosedLoopSystem& system) {
  const auto& P = system.plant;
  const auto& C = system.feedback_controller;

  // loop polynomial pieces over the common denominator P.den * C.den
  auto num_pc = poly_mul(P.numerator, C.numerator);
  auto den_pc = poly_mul(P.denominator, C.denominator);
  auto loop_num = poly_add(den_pc, num_pc);  // numerator of 1 + P*C_fb
  if (identically_zero(loop_num)) {
    throw IllPosedLoop("1 + P*C_fb is identically zero");
  }

  ClosedLoopTransfer result;
  // shared denominator keeps from_r + from_d exactly 1 on exact inputs
  auto shared_den = poly_mul(den_pc, loop_num);
  result.from_reference = TransferFunction(poly_mul(num_pc, den_pc), shared_den);

  if (!system.feedforward_controller) {
    result.from_disturbance = TransferFunction(poly_mul(den_pc, den_pc), shared_den);
    return result;
  }

  const auto& F = *system.feedforward_controller;
  auto num_pf = poly_mul(P.numerator, F.numerator);
  auto den_pf = poly_mul(P.denominator, F.denominator);
  auto ff_num = poly_add(den_pf, num_pf);  // numerator of 1 + P*C_ff
  result.from_disturbance =
      TransferFunction(poly_mul(ff_num, den_pc), poly_mul(den_pf, loop_num));
  return result;
}

TransferFunction ideal_feedforward(const TransferFunction& plant) {
  return negate(invert(plant));
}

TransferFunction proper_feedforward(const TransferFunction& plant, double epsilon) {
  if (epsilon <= 0.0) throw Error("proper_feedforward: epsilon must be positive");
  auto ideal = ideal_feedforward(plant);
  int excess = ideal.numerator_degree() - ideal.denominator_degree();
  if (excess <= 0) return ideal;
  std::vector<double> rolloff{1.0};
  for (int i = 0; i < excess; ++i) rolloff = poly_mul(rolloff, {1.0, epsilon});
  return {ideal.numerator, poly_mul(ideal.denominator, rolloff)};
}

// ---- simulation ----------------------------------------------------------------

DiscreteBlock::DiscreteBlock(const TransferFunction& tf, double dt) {
  if (!tf.proper()) {
    throw ImproperSystem(util::cat("cannot discretize improper block ", tf.describe()));
  }
  if (dt <= 0.0) throw Error("dt must be positive");

  const int n = tf.denominator_degree();
  const double c = 2.0 / dt;

  // expand num(s), den(s) under s = c (z-1)/(z+1), cleared by (z+1)^n:
  //   poly_z = sum_i coeff_i * c^i * (z-1)^i * (z+1)^(n-i)
  auto bilinear_poly = [&](const std::vector<double>& coeffs) {
    std::vector<double> acc(static_cast<std::size_t>(n) + 1, 0.0);
    double c_power = 1.0;
    for (int i = 0; i <= n; ++i) {
      double coeff = i < static_cast<int>(coeffs.size()) ? coeffs[i] : 0.0;
      if (coeff != 0.0) {
        std::vector<double> term{1.0};
        for (int k = 0; k < i; ++k) term = poly_mul(term, {-1.0, 1.0});       // (z-1)^i
        for (int k = 0; k < n - i; ++k) term = poly_mul(term, {1.0, 1.0});    // (z+1)^(n-i)
        acc = poly_add(acc, poly_scale(term, coeff * c_power));
      }
      c_power *= c;
    }
    return acc;
  };

  auto num_z = bilinear_poly(tf.numerator);
  auto den_z = bilinear_poly(tf.denominator);
  double lead = den_z.back();  // coefficient of z^n = den(c), nonzero for sane dt
  if (lead == 0.0) throw Error("bilinear map degenerates at this dt");

  // difference-equation weights, descending delay: index j multiplies x[k-j]
  b_.assign(static_cast<std::size_t>(n) + 1, 0.0);
  a_.assign(static_cast<std::size_t>(n) + 1, 0.0);
  for (int j = 0; j <= n; ++j) {
    b_[j] = num_z[n - j] / lead;
    a_[j] = den_z[n - j] / lead;
  }
  past_inputs_.assign(b_.size(), 0.0);
  past_outputs_.assign(a_.size(), 0.0);
}

double DiscreteBlock::step(double input) {
  // shift delay lines; slot 0 is "now"
  for (std::size_t j = past_inputs_.size() - 1; j > 0; --j) {
    past_inputs_[j] = past_inputs_[j - 1];
  }
  past_inputs_[0] = input;
  double acc = 0.0;
  for (std::size_t j = 0; j < b_.size(); ++j) acc += b_[j] * past_inputs_[j];
  for (std::size_t j = 1; j < a_.size(); ++j) acc -= a_[j] * past_outputs_[j - 1];
  for (std::size_t j = past_outputs_.size() - 1; j > 0; --j) {
    past_outputs_[j] = past_outputs_[j - 1];
  }
  past_outputs_[0] = acc;
  return acc;
}

void DiscreteBlock::reset() {
  std::fill(past_inputs_.begin(), past_inputs_.end(), 0.0);
  std::fill(past_outputs_.begin(), past_outputs_.end(), 0.0);
}

double SimTrace::steady_state_y() const {
  if (y.empty()) throw Error("empty simulation trace");
  return y.back();
}

void SimTrace::write_csv(std::ostream& os) const {
  os << "t,r,d,y,u_fb,u_ff\n";
  char buf[160];
  for (std::size_t k = 0; k < t.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", t[k], r[k], d[k],
                  y[k], u_fb[k], u_ff[k]);
    os << buf;
  }
}

std::vector<double> step_signal(std::size_t horizon, double amplitude) {
  return std::vector<double>(horizon, amplitude);
}

std::vector<double> zero_signal(std::size_t horizon) {
  return std::vector<double>(horizon, 0.0);
}

SimTrace simulate(const ClosedLoopSystem& system, const std::vector<double>& reference,
                  const std::vector<double>& disturbance, const SimOptions& options) {
  if (reference.size() != disturbance.size()) {
    throw Error("reference and disturbance signals differ in length");
  }

  // Every loop component must be realizable on its own, even though the output
  // is computed from the derived closed-loop transfers below. This is where an
  // ideal (improper) feedforward inverse gets rejected.
  auto require_proper = [](const TransferFunction& tf, const char* role) {
    if (!tf.proper()) {
      throw ImproperSystem(util::cat(role, " is improper: ", tf.describe()));
    }
  };
  require_proper(system.plant, "plant");
  require_proper(system.feedback_controller, "feedback controller");
  std::optional<DiscreteBlock> feedforward;
  std::optional<DiscreteBlock> injection_path;
  if (system.feedforward_controller) {
    require_proper(*system.feedforward_controller, "feedforward controller");
    feedforward.emplace(*system.feedforward_controller, options.dt);
    injection_path.emplace(system.plant, options.dt);
  }
  DiscreteBlock feedback(system.feedback_controller, options.dt);

  // y is the superposition of the closed-loop responses. Discretizing the
  // derived transfers sidesteps the algebraic loop that stepping the raw
  // components would have to cut with an artificial delay. The feedforward
  // branch is kept structural (C_ff, then the plant, into the sensitivity)
  // instead of folded into one transfer: the folded form is a stiff
  // high-order polynomial whose direct-form coefficients cancel its s=0 zero
  // only approximately, while the cascade cancels in the signals.
  ClosedLoopSystem pure = system;
  pure.feedforward_controller.reset();
  auto transfers = closed_loop(pure);
  DiscreteBlock from_reference(transfers.from_reference, options.dt);
  DiscreteBlock sensitivity(transfers.from_disturbance, options.dt);

  SimTrace trace;
  const auto horizon = reference.size();
  trace.t.reserve(horizon);
  trace.r = reference;
  trace.d = disturbance;
  trace.y.reserve(horizon);
  trace.u_fb.reserve(horizon);
  trace.u_ff.reserve(horizon);

  auto guard_magnitude = [&options](double value, const char* name, std::size_t k) {
    if (!std::isfinite(value) || std::fabs(value) > options.divergence_bound) {
      throw UnstableLoop(
          util::cat("|", name, "| exceeded ", options.divergence_bound, " at step ", k));
    }
  };

  for (std::size_t k = 0; k < horizon; ++k) {
    double u_ff = 0.0;
    double injected = 0.0;
    if (feedforward) {
      u_ff = feedforward->step(disturbance[k]);
      injected = injection_path->step(u_ff);
    }
    double y = from_reference.step(reference[k]) + sensitivity.step(disturbance[k] + injected);
    guard_magnitude(y, "y", k);
    // reconstructed actuator signal; divergence here flags a loop that is
    // only externally stable through an unstable cancellation
    double u_fb = feedback.step(reference[k] - y);
    guard_magnitude(u_fb, "u_fb", k);
    guard_magnitude(u_ff, "u_ff", k);
    trace.t.push_back(double(k) * options.dt);
    trace.y.push_back(y);
    trace.u_fb.push_back(u_fb);
    trace.u_ff.push_back(u_ff);
  }
  return trace;
}

}  // namespace maneuver::lti
