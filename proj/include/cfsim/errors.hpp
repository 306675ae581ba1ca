#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cfsim {

/// Base class for every error raised by the simulator.
class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Violation {
  std::string path;     // e.g. "topology.orus[2].num_antennas"
  std::string message;

  bool operator==(const Violation&) const = default;
};

class ConfigError : public SimError {
 public:
  explicit ConfigError(std::vector<Violation> violations)
      : SimError(render(violations)), violations_(std::move(violations)) {}
  ConfigError(std::string path, std::string message)
      : ConfigError(std::vector<Violation>{{std::move(path), std::move(message)}}) {}

  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  static std::string render(const std::vector<Violation>& v) {
    std::string out = "invalid configuration:";
    for (const auto& item : v) out += "\n  " + item.path + ": " + item.message;
    return out;
  }

  std::vector<Violation> violations_;
};

class AllZeroRsrp : public SimError {
 public:
  explicit AllZeroRsrp(int user = -1)
      : SimError(user < 0 ? std::string("all RSRP entries are zero")
                          : "all RSRP entries are zero for user " + std::to_string(user)),
        user_(user) {}
  int user() const noexcept { return user_; }

 private:
  int user_;
};

class RankDeficient : public SimError {
 public:
  explicit RankDeficient(double condition)
      : SimError("channel Gram matrix is rank deficient (condition " +
                 std::to_string(condition) + ")"),
        condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

class NoPendingAction : public SimError {
 public:
  NoPendingAction() : SimError("bandit update without a pending action") {}
};

class EmptyWindow : public SimError {
 public:
  EmptyWindow() : SimError("reward window holds no samples") {}
};

class WindowLengthMismatch : public SimError {
 public:
  WindowLengthMismatch(std::size_t got, std::size_t expected)
      : SimError("KPI window has " + std::to_string(got) + " slots, expected " +
                 std::to_string(expected)) {}
};

class UnknownDestination : public SimError {
 public:
  explicit UnknownDestination(const std::string& name)
      : SimError("unknown bus destination '" + name + "'") {}
};

}  // namespace cfsim
