#pragma once

#include <optional>
#include <utility>

#include "regrasp/errors.hpp"

namespace test_helpers {

/// Runs fn and reports the regrasp error code it raised, if any.
template <typename Fn>
std::optional<regrasp::ErrorCode> error_code_of(Fn&& fn) {
  try {
    std::forward<Fn>(fn)();
    return std::nullopt;
  } catch (const regrasp::Error& e) {
    return e.code();
  }
}

}  // namespace test_helpers
