#pragma once

#include <stdexcept>
#include <string>

namespace perfpower {

// Base of every error raised by the library. Callers that only care about
// "something in perfpower failed" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Click model assigns zero total weight to a page.
class DegenerateModel : public Error {
 public:
  using Error::Error;
};

class EmptyGroup : public Error {
 public:
  using Error::Error;
};

// Distortion relative to a zero reference click share.
class UndefinedDistortion : public Error {
 public:
  using Error::Error;
};

// Bootstrap statistic undefined on too many resamples.
class UnstableStatistic : public Error {
 public:
  using Error::Error;
};

}  // namespace perfpower
