#pragma once

#include <stdexcept>
#include <string>

namespace lfsg {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyMatrix : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidSpec : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InsufficientClassSize : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonSquare : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ShapeMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EigFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SolveFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct LengthMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptySample : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyCluster : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotImplemented : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace lfsg
