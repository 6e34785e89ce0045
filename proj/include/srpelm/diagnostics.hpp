#pragma once

#include <functional>
#include <iostream>
#include <mutex>
#include <string>
#include <utility>

namespace srpelm {

using WarningSink = std::function<void(const std::string&)>;

namespace detail {
struct WarningState {
  std::mutex mu;
  WarningSink sink = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
};
inline WarningState& warning_state() {
  static WarningState state;
  return state;
}
}  // namespace detail

/// Replaces the warning destination (stderr by default); returns the old one.
inline WarningSink set_warning_sink(WarningSink sink) {
  auto& st = detail::warning_state();
  std::lock_guard lock(st.mu);
  std::swap(st.sink, sink);
  return sink;
}

inline void warn(const std::string& msg) {
  auto& st = detail::warning_state();
  std::lock_guard lock(st.mu);
  if (st.sink) st.sink(msg);
}

}  // namespace srpelm
