#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pulsediff {

enum class Errc {
  invalid_argument,  // precondition or input validation failed
  parse,             // malformed file contents
  io,                // filesystem failure
  degenerate,        // input is well formed but carries too little signal
  diverged,          // numerical failure during optimisation
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::parse: return "parse";
    case Errc::io: return "io";
    case Errc::degenerate: return "degenerate";
    case Errc::diverged: return "diverged";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace pulsediff
