#pragma once

#include <stdexcept>
#include <string>

namespace piqa {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : Error {
  using Error::Error;
};
struct FormatError : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};
struct ValidationError : Error {
  using Error::Error;
};
struct ArgumentError : Error {
  using Error::Error;
};
struct ShapeError : Error {
  using Error::Error;
};
struct ForgeError : Error {
  using Error::Error;
};
struct RegionError : Error {
  using Error::Error;
};
struct NetworkError : Error {
  using Error::Error;
};
struct SchemaError : Error {
  using Error::Error;
};
struct MissingEntryError : Error {
  using Error::Error;
};

}  // namespace piqa
