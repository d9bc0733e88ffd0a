#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace telextiles {

// Out-of-range configuration or argument.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DatasetError : public std::runtime_error {
 public:
  enum class Kind { MissingFile, ShapeMismatch, ChecksumMismatch, Format, Io };

  DatasetError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { Format, Version, ParamCount, Io };

  CheckpointError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

// Non-finite loss during training.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed serial frame; offset is the first offending byte.
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(std::size_t offset, const std::string& reason)
      : std::runtime_error(reason + " at byte " + std::to_string(offset)),
        offset_(offset),
        reason_(reason) {}
  std::size_t offset() const noexcept { return offset_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t offset_;
  std::string reason_;
};

// Service-side request failures. The code is reported on the wire.
class ServiceError : public std::runtime_error {
 public:
  enum class Code { BadRequest, NotFound, Unavailable };

  ServiceError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

const char* to_string(ServiceError::Code code);

// Connection refused, timeout, or a broken stream.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Statistics on inputs that admit no answer (zero variance, ties).
class DegenerateInputError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace telextiles
