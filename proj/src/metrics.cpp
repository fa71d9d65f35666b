#include "maneuver/bench/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "maneuver/util/strings.hpp"

namespace maneuver::bench {

using nlohmann::json;

namespace {

std::string fixed(double value, int places) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", places, value);
  return buf;
}

void fill_derived(ScoreReport& report) {
  double sum = 0.0;
  for (double p : report.per_round_pass1) sum += p;
  report.pass1_avg = report.per_round_pass1.empty()
                         ? 0.0
                         : sum / double(report.per_round_pass1.size());
  double var = 0.0;
  for (double p : report.per_round_pass1) {
    var += (p - report.pass1_avg) * (p - report.pass1_avg);
  }
  // population variance: rounds are the whole population of interest here
  report.pass1_std = report.per_round_pass1.empty()
                         ? 0.0
                         : std::sqrt(var / double(report.per_round_pass1.size()));
  report.gap = report.pass_at_k - report.pass1_avg;
}

}  // namespace

ScoreReport aggregate(const std::vector<std::vector<bool>>& rounds_correct) {
  if (rounds_correct.empty()) throw RoundShapeMismatch("no rounds to aggregate");
  const auto task_count = rounds_correct.front().size();
  if (task_count == 0) throw RoundShapeMismatch("rounds cover zero tasks");
  for (std::size_t r = 1; r < rounds_correct.size(); ++r) {
    if (rounds_correct[r].size() != task_count) {
      throw RoundShapeMismatch(util::cat("round ", r + 1, " covers ",
                                         rounds_correct[r].size(), " tasks, round 1 covers ",
                                         task_count));
    }
  }

  ScoreReport report;
  report.task_count = static_cast<int>(task_count);
  report.rounds = static_cast<int>(rounds_correct.size());
  for (const auto& round : rounds_correct) {
    std::size_t hits = 0;
    for (bool correct : round) hits += correct ? 1 : 0;
    report.per_round_pass1.push_back(double(hits) / double(task_count));
  }
  std::size_t union_hits = 0;
  for (std::size_t t = 0; t < task_count; ++t) {
    for (const auto& round : rounds_correct) {
      if (round[t]) {
        ++union_hits;
        break;
      }
    }
  }
  report.pass_at_k = double(union_hits) / double(task_count);
  fill_derived(report);
  return report;
}

ScoreReport summarize_rounds(const std::vector<double>& per_round_pass1, double pass_at_k,
                             int task_count) {
  if (per_round_pass1.empty()) throw RoundShapeMismatch("no per-round rates given");
  ScoreReport report;
  report.task_count = task_count;
  report.rounds = static_cast<int>(per_round_pass1.size());
  report.per_round_pass1 = per_round_pass1;
  report.pass_at_k = pass_at_k;
  fill_derived(report);
  return report;
}

json ScoreReport::to_json() const {
  json j;
  j["gap"] = gap;
  j["pass1_avg"] = pass1_avg;
  j["pass1_std"] = pass1_std;
  j["pass_at_k"] = pass_at_k;
  j["per_round_pass1"] = per_round_pass1;
  j["rounds"] = rounds;
  j["task_count"] = task_count;
  return j;
}

std::string ScoreReport::to_markdown(const std::string& label) const {
  std::ostringstream os;
  os << "| System |";
  for (int r = 1; r <= rounds; ++r) os << " Pass@1 (round " << r << ") |";
  os << " Pass@" << rounds << " | Pass@1 avg | Pass@1 std | Gap |\n";
  os << "|---|";
  for (int r = 0; r < rounds; ++r) os << "---|";
  os << "---|---|---|---|\n";
  os << "| " << label << " |";
  for (double p : per_round_pass1) os << ' ' << fixed(p, 4) << " |";
  os << ' ' << fixed(pass_at_k, 4) << " | " << fixed(pass1_avg, 4) << " | "
     << fixed(pass1_std, 5) << " | " << fixed(gap, 4) << " |\n";
  return os.str();
}

}  // namespace maneuver::bench
