#pragma once

#include <stdexcept>
#include <string>

namespace bfem {

enum class ErrorCode {
  InvalidArgument = 1,
  Catalog = 2,
  Mesh = 3,
  Definiteness = 4,
  Solver = 5,
  Config = 6,
  Io = 7,
  Internal = 8,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

} // namespace bfem
