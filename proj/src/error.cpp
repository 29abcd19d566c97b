#include "harmap/error.hpp"

namespace harmap {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Topology: return "TopologyError";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::ResolutionTooCoarse: return "ResolutionTooCoarse";
    case ErrorKind::NoInterior: return "NoInterior";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::UndefinedCorner: return "UndefinedCorner";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::Stalled: return "StalledError";
    case ErrorKind::StepLimit: return "StepLimitError";
    case ErrorKind::DegenerateEndpoint: return "DegenerateEndpoint";
    case ErrorKind::TooManyFailures: return "TooManyFailures";
    case ErrorKind::NoNearbySamples: return "NoNearbySamples";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::Config: return "ConfigError";
  }
  return "Error";
}

}  // namespace harmap
