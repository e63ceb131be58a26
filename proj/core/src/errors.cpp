#include "ringrc/errors.hpp"

#include <fmt/format.h>

namespace ringrc {

NonFiniteState::NonFiniteState(std::size_t sample_index, double time_s)
    : NumericError(fmt::format("non-finite ring state at sample {} (t = {:.6g} s)", sample_index, time_s)),
      sample_index_(sample_index),
      time_s_(time_s) {}

}  // namespace ringrc
