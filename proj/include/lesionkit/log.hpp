#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace lesionkit::log {

using Sink = std::function<void(std::string_view level, std::string_view message)>;

/// Replaces the process-wide sink (default: "[level] message" on stderr).
/// Returns the previous sink. Passing an empty function restores the default.
Sink set_sink(Sink sink);

void info(std::string_view message);
void warn(std::string_view message);

/// Redirects the sink for the lifetime of the guard, collecting warnings and
/// dropping info lines. Process-wide; intended for tests.
class ScopedCapture {
 public:
  ScopedCapture();
  ~ScopedCapture();
  ScopedCapture(const ScopedCapture&) = delete;
  ScopedCapture& operator=(const ScopedCapture&) = delete;

  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  std::vector<std::string> warnings_;
  Sink previous_;
};

}  // namespace lesionkit::log
