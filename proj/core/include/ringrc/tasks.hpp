#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ringrc {

enum class LogicOp { AND, OR, XOR };

std::string_view to_string(LogicOp op);

/// "LO n1 with n2 R-bits": op applied to bits j and j-n1, readout sees
/// the nodes of bits j-n2+1 .. j.
struct TaskSpec {
  LogicOp op = LogicOp::AND;
  int n1 = 1;
  int n2 = 1;

  /// Parses "OP:n1:n2", e.g. "XOR:2:3". Throws ConfigError naming the field.
  static TaskSpec parse(std::string_view text);
  std::string to_string() const;
  void validate() const;
  /// First bit index with a defined target and a complete feature row.
  std::size_t valid_from() const;

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

int truth_eval(LogicOp op, int b1, int b2);

struct Targets {
  std::vector<std::uint8_t> y;  // y[j] for every bit; entries before valid_from are 0
  std::size_t valid_from = 0;
};

/// y[j] = op(bits[j], bits[j-n1]). bits[j-n1] entered the ring first.
Targets build_targets(std::span<const std::uint8_t> bits, const TaskSpec& spec);

}  // namespace ringrc
