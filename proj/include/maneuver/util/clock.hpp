#pragma once

#include <chrono>
#include <cstdint>

namespace maneuver::util {

// Time source for trajectory timestamps. Deterministic backends get a
// LogicalClock so repeated runs produce byte-identical artifacts.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_ms() = 0;
};

class WallClock final : public Clock {
 public:
  std::int64_t now_ms() override {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
  }
};

// Monotone counter, one tick per query, starting at 0.
class LogicalClock final : public Clock {
 public:
  std::int64_t now_ms() override { return next_++; }

 private:
  std::int64_t next_ = 0;
};

}  // namespace maneuver::util
