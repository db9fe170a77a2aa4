#pragma once

#include <stdexcept>
#include <string>

namespace forcesim {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define FORCESIM_DEFINE_ERROR(Name)       \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  };

FORCESIM_DEFINE_ERROR(DegenerateInput)
FORCESIM_DEFINE_ERROR(DegenerateDirection)
FORCESIM_DEFINE_ERROR(NonPositiveParameter)
FORCESIM_DEFINE_ERROR(NonFiniteState)
FORCESIM_DEFINE_ERROR(WrongVariant)
FORCESIM_DEFINE_ERROR(EmptySchedule)
FORCESIM_DEFINE_ERROR(NotAligned)
FORCESIM_DEFINE_ERROR(NothingToWipe)
FORCESIM_DEFINE_ERROR(NoContactManifold)
FORCESIM_DEFINE_ERROR(LengthMismatch)
FORCESIM_DEFINE_ERROR(EndOfDemo)
FORCESIM_DEFINE_ERROR(IoFailure)

#undef FORCESIM_DEFINE_ERROR

/// Config errors carry the offending line (0 when unknown) and field.
class ConfigParse : public Error {
 public:
  ConfigParse(const std::string& message, int line = 0, std::string field = {})
      : Error(format(message, line, field)), line_(line), field_(std::move(field)) {}

  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  static std::string format(const std::string& message, int line, const std::string& field) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!field.empty()) out += field + ": ";
    return out + message;
  }

  int line_;
  std::string field_;
};

}  // namespace forcesim
