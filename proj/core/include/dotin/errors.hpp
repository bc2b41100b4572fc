#ifndef DOTIN_ERRORS_HPP
#define DOTIN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dotin {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define DOTIN_DECLARE_ERROR(Name)      \
  class Name : public Error {          \
   public:                             \
    using Error::Error;                \
  }

DOTIN_DECLARE_ERROR(DimensionError);
DOTIN_DECLARE_ERROR(EmptySupportError);
DOTIN_DECLARE_ERROR(IndexError);
DOTIN_DECLARE_ERROR(RankError);
DOTIN_DECLARE_ERROR(DomainError);
DOTIN_DECLARE_ERROR(IngestionError);
DOTIN_DECLARE_ERROR(ConsistencyError);
DOTIN_DECLARE_ERROR(SpecError);
DOTIN_DECLARE_ERROR(GenerationError);
DOTIN_DECLARE_ERROR(MetricError);
DOTIN_DECLARE_ERROR(DivergenceError);
DOTIN_DECLARE_ERROR(ConfigError);

#undef DOTIN_DECLARE_ERROR

}  // namespace dotin

#endif  // DOTIN_ERRORS_HPP
