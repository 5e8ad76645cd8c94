#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fxcast {

enum class ErrorKind {
  parse,
  ordering,
  domain,
  insufficient_data,
  empty_window,
  empty_data,
  degenerate_scale,
  shape,
  rank,
  consumed_graph,
  unready_parameter,
  divergence,
  corrupt_checkpoint,
  incompatible_checkpoint,
  pairing,
  alignment,
  config,
  dependency,
  io,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a category so callers (and the
/// CLI exit code) can branch on it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace fxcast
