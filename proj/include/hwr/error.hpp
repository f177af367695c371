#pragma once

#include <stdexcept>
#include <string>

namespace hwr {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
  using Error::Error;
};

class NotFound : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class DegenerateGeometry : public Error {
public:
  using Error::Error;
};

class LayoutError : public Error {
public:
  using Error::Error;
};

class MalformedSkeleton : public Error {
public:
  MalformedSkeleton(int x, int y, int neighbours)
      : Error("malformed skeleton: pixel (" + std::to_string(x) + ", " + std::to_string(y) +
              ") has " + std::to_string(neighbours) + " neighbours"),
        x(x), y(y) {}
  int x;
  int y;
};

} // namespace hwr
