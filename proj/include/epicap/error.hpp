#pragma once

#include <stdexcept>
#include <string>

namespace epicap {

/// Error thrown by library operations. `code` is a stable machine-readable
/// identifier of the form "module.reason" (e.g. "corpus.duplicate_row").
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

}  // namespace epicap
