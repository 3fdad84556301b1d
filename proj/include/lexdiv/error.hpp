#pragma once

#include <stdexcept>
#include <string>

namespace lexdiv {

enum class ErrorKind {
  InvalidArgument,  // bad input value or configuration
  MissingInput,     // a required file or upstream artifact is absent
  Parse,            // malformed file content
  Io,               // read/write failure
  State,            // operation not valid in the current state
  Runtime           // numerical or other runtime failure
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) throw Error(ErrorKind::InvalidArgument, what);
}

}  // namespace lexdiv
