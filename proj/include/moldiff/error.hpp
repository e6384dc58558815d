#pragma once

#include <stdexcept>
#include <string>

namespace moldiff {

// Machine-readable failure categories. The CLI maps these to exit codes
// and emits them in the JSON error object.
enum class ErrorCategory {
    usage,    // bad CLI invocation
    config,   // malformed or unknown configuration
    io,       // filesystem / serialization failures
    data,     // malformed input data (SMILES, TSV rows, ...)
    shape,    // tensor shape contract violated
    numeric,  // non-finite value produced
    state,    // stage ordering / missing prerequisite
};

const char* to_string(ErrorCategory c);

class Error : public std::runtime_error {
  public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const { return category_; }

  private:
    ErrorCategory category_;
};

[[noreturn]] inline void fail(ErrorCategory c, const std::string& msg) {
    throw Error(c, msg);
}

}  // namespace moldiff
