#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace msda {

enum class Errc {
  invalid_argument,
  io,
  parse,
  numeric,
  degenerate,
  stalled,
};

// Every failure raised by the library carries the operation that detected it;
// what() reads "<operation>: <message>".
class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string_view operation, std::string_view message)
      : std::runtime_error(std::string(operation) + ": " + std::string(message)),
        code_(code),
        operation_(operation) {}

  Errc code() const noexcept { return code_; }
  const std::string& operation() const noexcept { return operation_; }

 private:
  Errc code_;
  std::string operation_;
};

}  // namespace msda
