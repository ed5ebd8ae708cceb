#pragma once

#include <stdexcept>
#include <string>

namespace ctxbias {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable/unwritable files.
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents (CEMB1, word2vec text, JSON lists, UTF-8).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data that cannot support the requested computation
// (degenerate point clouds, zero variance, too few samples, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace ctxbias
