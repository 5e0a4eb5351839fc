#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aap {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A residual evaluation produced a non-finite entry.
class NumericalBreakdown : public Error {
public:
  NumericalBreakdown(std::size_t index, double value)
      : Error("non-finite residual entry " + std::to_string(value) + " at index " +
              std::to_string(index)),
        index_(index) {}

  std::size_t index() const noexcept { return index_; }

private:
  std::size_t index_;
};

class UnknownField : public Error {
public:
  using Error::Error;
};

class InvalidMask : public Error {
public:
  using Error::Error;
};

class InvalidConfig : public Error {
public:
  using Error::Error;
};

/// Triangular factor too close to singular for a stable solve.
class RankDeficient : public Error {
public:
  using Error::Error;
};

class ResourceLimit : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

} // namespace aap
