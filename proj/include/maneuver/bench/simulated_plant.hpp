#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "maneuver/gateway/chat.hpp"

namespace maneuver::bench {

// Failure-injection profile for the simulated model. Every entry pairs one
// canonical weakness tag with the per-task probability that the drafted
// reasoning exhibits that failure.
struct FailureProfile {
  std::vector<std::pair<std::string, double>> rates;
  // Probability that a guard critique naming a drafted failure leads the
  // plant to correct it in the revision (the after-the-fact channel).
  double critique_fix_rate = 0.0;
  // Probability that an advisory naming a weakness suppresses a matching
  // drafted failure in the revision (the in-advance channel).
  double advisory_suppress_rate = 0.0;

  void validate() const;  // all probabilities must lie in [0, 1]
};

// Deterministic stochastic stand-in for a hosted model, used to study how
// the three run modes shape accuracy and round-to-round variance at desk
// scale. One object serves all four conversation shapes the runtime
// produces and branches on prompt content:
//   - execution: answers from the internal key, injecting profile failures
//     as visible "Issue marker: <tag>." lines; a revision after a guard
//     signal drops critiqued markers and, with advisory_suppress_rate,
//     markers named by advisories
//   - guard review: critiques each drafted marker with critique_fix_rate;
//     when the system prompt carries a performance profile it adds one
//     advisory per profiled weakness; with nothing to say it replies with
//     the canonical all-clear sentence
//   - per-task analysis: fixed section skeleton whose error section lists
//     the marker tags observed in the log
//   - profile synthesis: fixed report skeleton whose weakness bullets list
//     the tags named by the submitted analyses
//
// All coin flips hash (seed, decision kind, run root, tag), where the run
// root is the request tag minus the guard suffix and the mode token. Keying
// out the mode gives common random numbers across modes: the same failures
// fire for the same task and round, so mode comparisons measure the
// control channels, not resampling noise.
class SimulatedPlant : public gateway::Backend {
 public:
  SimulatedPlant(FailureProfile profile, std::uint64_t seed);

  gateway::ChatResponse complete(const gateway::ChatRequest& request) override;

  // Internal answer key, exposed so dataset generation can align gold
  // answers with what the simulated model will say.
  static std::string reference_answer(const std::string& task_id);
  static std::string question_text(const std::string& task_id);

 private:
  bool coin(std::string_view kind, std::string_view root, std::string_view tag,
            double rate) const;

  std::string act_as_plant(const gateway::ChatRequest& request) const;
  std::string act_as_guard(const gateway::ChatRequest& request) const;
  std::string act_as_analyst(const gateway::ChatRequest& request) const;
  std::string act_as_synthesizer(const gateway::ChatRequest& request) const;

  FailureProfile profile_;
  std::uint64_t seed_ = 0;
};

}  // namespace maneuver::bench
