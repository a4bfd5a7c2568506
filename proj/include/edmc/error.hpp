#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace edmc {

enum class ErrorKind {
  invalid_input,
  shape_mismatch,
  index_out_of_range,
  not_embeddable,
  degenerate_init,
  degenerate_step,
  degenerate_iterate,
  too_large,
  io,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace edmc
