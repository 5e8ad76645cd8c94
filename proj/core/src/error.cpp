#include "fxcast/error.hpp"

namespace fxcast {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse: return "parse";
    case ErrorKind::ordering: return "ordering";
    case ErrorKind::domain: return "domain";
    case ErrorKind::insufficient_data: return "insufficient-data";
    case ErrorKind::empty_window: return "empty-window";
    case ErrorKind::empty_data: return "empty-data";
    case ErrorKind::degenerate_scale: return "degenerate-scale";
    case ErrorKind::shape: return "shape";
    case ErrorKind::rank: return "rank";
    case ErrorKind::consumed_graph: return "consumed-graph";
    case ErrorKind::unready_parameter: return "unready-parameter";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::corrupt_checkpoint: return "corrupt-checkpoint";
    case ErrorKind::incompatible_checkpoint: return "incompatible-checkpoint";
    case ErrorKind::pairing: return "pairing";
    case ErrorKind::alignment: return "alignment";
    case ErrorKind::config: return "config";
    case ErrorKind::dependency: return "dependency";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace fxcast
