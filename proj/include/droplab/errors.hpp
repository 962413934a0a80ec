#pragma once

#include <stdexcept>
#include <string>

namespace droplab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (bad lengths, ranges, ...).
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// Both class likelihoods vanish, so P(y | x = v) is undefined.
class UndefinedPosterior : public Error {
public:
  using Error::Error;
};

class EnumerationTooLarge : public Error {
public:
  using Error::Error;
};

/// Training data lacks one of the two classes.
class DegenerateData : public Error {
public:
  using Error::Error;
};

class DimensionTooLarge : public Error {
public:
  using Error::Error;
};

class EmptyData : public Error {
public:
  using Error::Error;
};

/// Score variance is zero; the normalized statistics are undefined.
class ZeroVariance : public Error {
public:
  using Error::Error;
};

class RankDeficient : public Error {
public:
  using Error::Error;
};

/// Malformed corpus or configuration file. Carries the offending line
/// when one exists (0 otherwise).
class MalformedInput : public Error {
public:
  MalformedInput(const std::string &what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

} // namespace droplab
