#pragma once

#include <stdexcept>
#include <string>

namespace mcm {

enum class ErrorKind {
  InvalidArgument,  // precondition or config violation
  Query,            // unknown node / malformed CI query
  Parse,            // file format errors, carries location in the message
  Overlap,          // single-arm data, empty evaluation set
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace mcm
