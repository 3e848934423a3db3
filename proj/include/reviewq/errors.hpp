#pragma once

#include <stdexcept>
#include <string>

namespace reviewq {

/// Base of every error raised by the library. Callers that only need a
/// diagnostic can catch this and print what().
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A precondition of a public operation was violated by the caller.
class ContractError : public Error {
public:
  using Error::Error;
};

/// A data row or evidence entry names an unknown variable or state.
class InputError : public Error {
public:
  using Error::Error;
};

class StructureError : public Error {
public:
  using Error::Error;
};

/// The evidence has zero probability under the model.
class DegenerateEvidenceError : public Error {
public:
  using Error::Error;
};

/// Malformed or invalid model document.
class LoadError : public Error {
public:
  using Error::Error;
};

class VersionError : public LoadError {
public:
  using LoadError::LoadError;
};

class FitError : public Error {
public:
  using Error::Error;
};

class ClockSkewError : public Error {
public:
  using Error::Error;
};

class StorageError : public Error {
public:
  using Error::Error;
};

/// Training was requested with no closed changes to learn from.
class EmptyDatasetError : public ContractError {
public:
  EmptyDatasetError() : ContractError("dataset is empty") {}
};

class ConfigError : public Error {
public:
  using Error::Error;
};

/// Failure talking to the review server.
class FetchError : public Error {
public:
  enum class Kind {
    Transient, ///< network failure or 5xx; worth retrying
    Protocol,  ///< the server answered with something we cannot parse
    Auth,      ///< credentials rejected; retrying will not help
  };

  FetchError(Kind kind, const std::string &what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

private:
  Kind kind_;
};

} // namespace reviewq
