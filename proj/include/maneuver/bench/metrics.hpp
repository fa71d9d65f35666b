#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "maneuver/error.hpp"

namespace maneuver::bench {

// Rounds must all cover the same task list.
class RoundShapeMismatch : public Error {
 public:
  using Error::Error;
};

struct ScoreReport {
  int task_count = 0;
  int rounds = 0;
  std::vector<double> per_round_pass1;
  double pass_at_k = 0.0;    // union over rounds
  double pass1_avg = 0.0;    // mean of per-round pass@1
  double pass1_std = 0.0;    // population standard deviation of per-round pass@1
  double gap = 0.0;          // pass_at_k - pass1_avg

  nlohmann::json to_json() const;
  std::string to_markdown(const std::string& label) const;
};

// rounds_correct[r][t] is round r's verdict on task t.
ScoreReport aggregate(const std::vector<std::vector<bool>>& rounds_correct);

// Derived-statistics route when only per-round proportions and the union
// proportion are known (no per-task booleans).
ScoreReport summarize_rounds(const std::vector<double>& per_round_pass1, double pass_at_k,
                             int task_count);

}  // namespace maneuver::bench
