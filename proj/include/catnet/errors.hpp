#pragma once

#include <stdexcept>
#include <string>

namespace catnet {

/// Base of every error raised by the library. `code()` is a stable short
/// identifier used in JSON reports and tests.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define CATNET_DEFINE_ERROR(Name)                                           \
  class Name : public Error {                                               \
   public:                                                                  \
    explicit Name(const std::string& what) : Error(#Name, what) {}          \
  }

CATNET_DEFINE_ERROR(SelfLoop);
CATNET_DEFINE_ERROR(OutOfRange);
CATNET_DEFINE_ERROR(DimensionMismatch);
CATNET_DEFINE_ERROR(InvalidArgument);
CATNET_DEFINE_ERROR(EvaluationFailure);
CATNET_DEFINE_ERROR(FrozenDegenerate);
CATNET_DEFINE_ERROR(BlowUp);
CATNET_DEFINE_ERROR(NotInNR);
CATNET_DEFINE_ERROR(PreconditionViolated);
CATNET_DEFINE_ERROR(EmptyGrid);
CATNET_DEFINE_ERROR(DegenerateFamily);
CATNET_DEFINE_ERROR(StencilOutOfDomain);
CATNET_DEFINE_ERROR(Divergence);

#undef CATNET_DEFINE_ERROR

/// Configuration error; `pointer()` is a JSON pointer into the config.
class ConfigError : public Error {
 public:
  ConfigError(std::string pointer, const std::string& what)
      : Error("ConfigError", pointer + ": " + what), pointer_(std::move(pointer)) {}
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

}  // namespace catnet
