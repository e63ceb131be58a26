#include "ringrc/tasks.hpp"

#include <algorithm>
#include <charconv>

#include <fmt/format.h>

#include "ringrc/errors.hpp"

namespace ringrc {

std::string_view to_string(LogicOp op) {
  switch (op) {
    case LogicOp::AND: return "AND";
    case LogicOp::OR: return "OR";
    case LogicOp::XOR: return "XOR";
  }
  return "?";
}

namespace {

int parse_int_field(std::string_view text, std::string_view field, std::string_view whole) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
    throw ConfigError(fmt::format("task '{}': field {} must be an integer, got '{}'", whole, field, text));
  return v;
}

}  // namespace

TaskSpec TaskSpec::parse(std::string_view text) {
  const auto c1 = text.find(':');
  const auto c2 = c1 == std::string_view::npos ? c1 : text.find(':', c1 + 1);
  if (c1 == std::string_view::npos) throw ConfigError(fmt::format("task '{}': missing field n1 (expected OP:n1:n2)", text));
  if (c2 == std::string_view::npos) throw ConfigError(fmt::format("task '{}': missing field n2 (expected OP:n1:n2)", text));
  const auto op_text = text.substr(0, c1);
  TaskSpec t;
  if (op_text == "AND") t.op = LogicOp::AND;
  else if (op_text == "OR") t.op = LogicOp::OR;
  else if (op_text == "XOR") t.op = LogicOp::XOR;
  else throw ConfigError(fmt::format("task '{}': field op must be AND, OR or XOR, got '{}'", text, op_text));
  t.n1 = parse_int_field(text.substr(c1 + 1, c2 - c1 - 1), "n1", text);
  t.n2 = parse_int_field(text.substr(c2 + 1), "n2", text);
  t.validate();
  return t;
}

std::string TaskSpec::to_string() const { return fmt::format("{}:{}:{}", ringrc::to_string(op), n1, n2); }

void TaskSpec::validate() const {
  if (n1 < 1) throw ConfigError(fmt::format("task {}: field n1 must be >= 1", to_string()));
  if (n2 < 1 || n2 > n1 + 1) throw ConfigError(fmt::format("task {}: field n2 must lie in 1..n1+1", to_string()));
}

std::size_t TaskSpec::valid_from() const { return static_cast<std::size_t>(std::max(n1, n2 - 1)); }

int truth_eval(LogicOp op, int b1, int b2) {
  switch (op) {
    case LogicOp::AND: return b1 & b2;
    case LogicOp::OR: return b1 | b2;
    case LogicOp::XOR: return b1 ^ b2;
  }
  return 0;
}

Targets build_targets(std::span<const std::uint8_t> bits, const TaskSpec& spec) {
  spec.validate();
  const auto n1 = static_cast<std::size_t>(spec.n1);
  if (bits.size() <= n1) throw ConfigError(fmt::format("stream of {} bits too short for n1 = {}", bits.size(), n1));
  Targets t;
  t.valid_from = spec.valid_from();
  t.y.assign(bits.size(), 0);
  for (std::size_t j = n1; j < bits.size(); ++j)
    t.y[j] = static_cast<std::uint8_t>(truth_eval(spec.op, bits[j], bits[j - n1]));
  return t;
}

}  // namespace ringrc
