#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rerankkit {

/// Base class for failures while reading or writing on-disk data.
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& what, std::string path, std::uint64_t offset)
      : std::runtime_error(path + " @" + std::to_string(offset) + ": " + what),
        path_(std::move(path)),
        offset_(offset) {}

  const std::string& path() const noexcept { return path_; }
  /// Byte offset for binary files, line number for text files.
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::string path_;
  std::uint64_t offset_;
};

class MalformedHeaderError : public DataError {
  using DataError::DataError;
};

class TruncatedPayloadError : public DataError {
  using DataError::DataError;
};

class DimensionMismatchError : public DataError {
  using DataError::DataError;
};

/// Text-format error; offset() is the 1-based line number.
class ParseError : public DataError {
  using DataError::DataError;
};

/// Model file unreadable or written for a different feature layout.
class ModelFormatError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class GenerationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rerankkit
