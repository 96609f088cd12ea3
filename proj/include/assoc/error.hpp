#pragma once

#include <stdexcept>
#include <string>

namespace assoc {

// Errors are grouped by the exit code the command-line front end maps them to.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
  virtual const char* kind() const noexcept { return "internal"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
  const char* kind() const noexcept override { return "config"; }
};

class DataError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
  const char* kind() const noexcept override { return "data"; }
};

class ClientError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
  const char* kind() const noexcept override { return "client"; }
};

// Network unreachable, timeouts, connection resets after all retries.
class TransportError : public ClientError {
 public:
  using ClientError::ClientError;
  const char* kind() const noexcept override { return "transport"; }
};

// The server answered, but not with something usable.
class ProtocolError : public ClientError {
 public:
  using ClientError::ClientError;
  const char* kind() const noexcept override { return "protocol"; }
};

class CorrectionFailed : public ClientError {
 public:
  using ClientError::ClientError;
  const char* kind() const noexcept override { return "correction"; }
};

}  // namespace assoc
