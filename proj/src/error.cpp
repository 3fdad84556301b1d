#include "lexdiv/error.hpp"

namespace lexdiv {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::MissingInput: return "missing input";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Io: return "i/o error";
    case ErrorKind::State: return "invalid state";
    case ErrorKind::Runtime: return "runtime error";
  }
  return "error";
}

}  // namespace lexdiv
