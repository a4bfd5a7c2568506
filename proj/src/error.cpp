#include "edmc/error.hpp"

namespace edmc {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid_input";
    case ErrorKind::shape_mismatch: return "shape_mismatch";
    case ErrorKind::index_out_of_range: return "index_out_of_range";
    case ErrorKind::not_embeddable: return "not_embeddable";
    case ErrorKind::degenerate_init: return "degenerate_init";
    case ErrorKind::degenerate_step: return "degenerate_step";
    case ErrorKind::degenerate_iterate: return "degenerate_iterate";
    case ErrorKind::too_large: return "too_large";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace edmc
