#include "lesionkit/log.hpp"

#include <iostream>
#include <mutex>
#include <vector>

namespace lesionkit::log {
namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

void default_sink(std::string_view level, std::string_view message) {
  std::cerr << "[" << level << "] " << message << '\n';
}

Sink& current_sink() {
  static Sink sink = default_sink;
  return sink;
}

void emit(std::string_view level, std::string_view message) {
  std::lock_guard lock(sink_mutex());
  current_sink()(level, message);
}

}  // namespace

Sink set_sink(Sink sink) {
  std::lock_guard lock(sink_mutex());
  Sink previous = std::move(current_sink());
  current_sink() = sink ? std::move(sink) : Sink(default_sink);
  return previous;
}

void info(std::string_view message) { emit("info", message); }
void warn(std::string_view message) { emit("warning", message); }

ScopedCapture::ScopedCapture() {
  previous_ = set_sink([this](std::string_view level, std::string_view message) {
    if (level == "warning") warnings_.emplace_back(message);
  });
}

ScopedCapture::~ScopedCapture() { set_sink(std::move(previous_)); }

}  // namespace lesionkit::log
