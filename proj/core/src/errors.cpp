#include "qtunnel/errors.hpp"

namespace qtunnel {

error::error(std::string module, std::string op, const std::string& message)
    : std::runtime_error("[" + module + "/" + op + "] " + message),
      module_(std::move(module)),
      op_(std::move(op)),
      detail_(message) {}

ContinuationError::ContinuationError(std::string module, std::string op, const std::string& message,
                                     double last_good_k)
    : error(std::move(module), std::move(op), message + " (last good k = " + std::to_string(last_good_k) + ")"),
      last_good_k_(last_good_k) {}

}  // namespace qtunnel
