#pragma once

#include <stdexcept>
#include <string>

namespace qtunnel {

// Base for all solver errors; carries the module and operation that raised it.
class error : public std::runtime_error {
public:
  error(std::string module, std::string op, const std::string& message);

  const std::string& module() const noexcept { return module_; }
  const std::string& op() const noexcept { return op_; }
  const std::string& detail() const noexcept { return detail_; }
  virtual const char* kind() const noexcept { return "error"; }

private:
  std::string module_;
  std::string op_;
  std::string detail_;
};

#define QTUNNEL_DECLARE_ERROR(name)                                   \
  class name : public error {                                         \
  public:                                                             \
    using error::error;                                               \
    const char* kind() const noexcept override { return #name; }      \
  };

QTUNNEL_DECLARE_ERROR(ConfigurationError)
QTUNNEL_DECLARE_ERROR(ValidationError)
QTUNNEL_DECLARE_ERROR(NoWellError)
QTUNNEL_DECLARE_ERROR(NoExitError)
QTUNNEL_DECLARE_ERROR(SingularityError)
QTUNNEL_DECLARE_ERROR(DomainError)
QTUNNEL_DECLARE_ERROR(TailError)
QTUNNEL_DECLARE_ERROR(IntegrationError)
QTUNNEL_DECLARE_ERROR(PoleError)
QTUNNEL_DECLARE_ERROR(ExtrapolationError)
QTUNNEL_DECLARE_ERROR(DegenerateError)
QTUNNEL_DECLARE_ERROR(SemanticsError)
QTUNNEL_DECLARE_ERROR(ResonanceError)
QTUNNEL_DECLARE_ERROR(BoxError)
QTUNNEL_DECLARE_ERROR(CutoffError)
QTUNNEL_DECLARE_ERROR(DefinitenessError)
QTUNNEL_DECLARE_ERROR(SaddleError)

#undef QTUNNEL_DECLARE_ERROR

// Homotopy failure; remembers the last coupling value that converged.
class ContinuationError : public error {
public:
  ContinuationError(std::string module, std::string op, const std::string& message, double last_good_k);
  double last_good_k() const noexcept { return last_good_k_; }
  const char* kind() const noexcept override { return "ContinuationError"; }

private:
  double last_good_k_;
};

}  // namespace qtunnel
