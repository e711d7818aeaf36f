#pragma once

#include <stdexcept>
#include <string>

namespace cf {

enum class ErrorKind {
  UnitCertificateViolated,
  NotNormalized,
  UnsupportedZeroTest,
  InconsistentOrientation,
  NotPrepared,
  FragmentEscape,
  EqualCenters,
  NotDetermined,
  NotCase2,
  NotBounded,
  NotAllUndetermined,
  EmptyExpr,
  NoDecay,
  NotIntegrable,
  BoundUnitUnsupported,
  DomainError,
  SingularityTooStrong,
  SyntaxError,
  Internal,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what), kind_(kind)
  {
  }

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Parse errors carry a 1-based source position.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, int line, int column)
      : Error(ErrorKind::SyntaxError,
              what + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
        line_(line),
        column_(column)
  {
  }

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace cf
