#pragma once

#include <stdexcept>
#include <string>

namespace geostein {

struct ChartDomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct EmptyPointSet : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SeriesDivergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidSmoothness : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct UnsupportedSmoothness : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct UnsupportedTarget : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DuplicatePoints : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct FactorizationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateSystem : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LengthMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InsufficientData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnknownIntegrand : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace geostein
