#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dtm {

enum class ErrorKind {
  kDimension,
  kIndex,
  kNotAFunction,
  kArgument,
  kShape,
  kRange,
  kParse,
  kStratification,
  kConfig,
  kIo,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so callers (the CLI in
// particular) can map it onto an exit code without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace dtm
