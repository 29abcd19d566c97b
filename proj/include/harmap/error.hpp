#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace harmap {

enum class ErrorKind {
  Parse,
  Topology,
  Io,
  ResolutionTooCoarse,
  NoInterior,
  NotConverged,
  UndefinedCorner,
  OutOfDomain,
  Stalled,
  StepLimit,
  DegenerateEndpoint,
  TooManyFailures,
  NoNearbySamples,
  InvalidParams,
  Config,
};

const char* to_string(ErrorKind kind);

/// Base of every error raised by the library. The kind is stable and is what
/// callers (and the CLI's JSON report) switch on; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define HARMAP_DEFINE_ERROR(Name, Kind)                                     \
  class Name : public Error {                                               \
   public:                                                                  \
    explicit Name(const std::string& message) : Error(ErrorKind::Kind, message) {} \
  };

HARMAP_DEFINE_ERROR(ParseError, Parse)
HARMAP_DEFINE_ERROR(IoError, Io)
HARMAP_DEFINE_ERROR(ResolutionTooCoarse, ResolutionTooCoarse)
HARMAP_DEFINE_ERROR(NoInterior, NoInterior)
HARMAP_DEFINE_ERROR(UndefinedCorner, UndefinedCorner)
HARMAP_DEFINE_ERROR(OutOfDomain, OutOfDomain)
HARMAP_DEFINE_ERROR(DegenerateEndpoint, DegenerateEndpoint)
HARMAP_DEFINE_ERROR(TooManyFailures, TooManyFailures)
HARMAP_DEFINE_ERROR(NoNearbySamples, NoNearbySamples)
HARMAP_DEFINE_ERROR(InvalidParams, InvalidParams)
HARMAP_DEFINE_ERROR(ConfigError, Config)

#undef HARMAP_DEFINE_ERROR

using Edge = std::pair<int, int>;

/// Mesh topology violation. `edges` lists the offending edges when the
/// problem is edge-local (open, non-manifold or misoriented).
class TopologyError : public Error {
 public:
  explicit TopologyError(const std::string& message, std::vector<Edge> edges = {})
      : Error(ErrorKind::Topology, message), edges_(std::move(edges)) {}

  const std::vector<Edge>& edges() const { return edges_; }

 private:
  std::vector<Edge> edges_;
};

}  // namespace harmap
