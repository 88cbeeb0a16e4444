#pragma once

#include <stdexcept>
#include <string>

namespace mocseg {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A file could not be opened, read or written.
struct IoError : Error {
  using Error::Error;
};

/// A file decoded but its content does not describe a usable raster.
struct FormatError : Error {
  using Error::Error;
};

/// Arguments outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

/// Label matrix exceeds what an on-disk encoding can represent.
struct CapacityError : Error {
  using Error::Error;
};

/// Synthetic lines could not be placed without overlap.
struct PlacementError : Error {
  using Error::Error;
};

/// Malformed structured text; carries the 1-based position of the failure.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(what + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
        line_(line), column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace mocseg
