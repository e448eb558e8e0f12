#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace odke {

using Timestamp = std::chrono::sys_seconds;
using Minutes = std::chrono::minutes;

// "2023-01-01T00:00:00Z"
std::string format_timestamp(Timestamp t);

// Accepts "YYYY-MM-DD" and "YYYY-MM-DDTHH:MM:SSZ". Throws ParseError.
Timestamp parse_timestamp(std::string_view text);

// floor((to - from) / 1 day); negative when `to` precedes `from`.
std::int64_t whole_days_between(Timestamp from, Timestamp to);

// All pipeline timestamps come from a Clock so runs can be replayed.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual Timestamp now() const = 0;
};

class SystemClock final : public Clock {
 public:
  Timestamp now() const override {
    return std::chrono::time_point_cast<std::chrono::seconds>(
        std::chrono::system_clock::now());
  }
};

// Simulated clock; only moves when told to.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(Timestamp start = Timestamp{}) : now_(start.time_since_epoch().count()) {}

  Timestamp now() const override { return Timestamp{std::chrono::seconds{now_.load()}}; }
  void set(Timestamp t) { now_.store(t.time_since_epoch().count()); }
  void advance(std::chrono::seconds d) { now_.fetch_add(d.count()); }

 private:
  std::atomic<std::int64_t> now_;
};

}  // namespace odke
