#pragma once

#include <cstddef>
#include <exception>
#include <stdexcept>
#include <string>

namespace tpd {

enum class ErrorCode {
  Dimension,
  Domain,
  RankDeficiency,
  DegenerateSample,
  Protocol,
  Format,
  Io,
};

/// Base exception for every failure raised by the library. The code is what
/// callers (and the CLI exit-code mapping) dispatch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(ErrorCode::Dimension, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorCode::Domain, what) {}
};

/// A covariance that had to be positive definite was not. `deficient_dims`
/// counts eigenvalues at or below the relative rank cutoff.
class RankDeficiencyError : public Error {
 public:
  RankDeficiencyError(std::size_t deficient_dims, std::size_t dimension, const std::string& what)
      : Error(ErrorCode::RankDeficiency, what),
        deficient_dims_(deficient_dims),
        dimension_(dimension) {}

  std::size_t deficient_dims() const noexcept { return deficient_dims_; }
  std::size_t dimension() const noexcept { return dimension_; }

 private:
  std::size_t deficient_dims_;
  std::size_t dimension_;
};

class DegenerateSampleError : public Error {
 public:
  explicit DegenerateSampleError(const std::string& what)
      : Error(ErrorCode::DegenerateSample, what) {}
};

class ProtocolError : public Error {
 public:
  explicit ProtocolError(const std::string& what) : Error(ErrorCode::Protocol, what) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(ErrorCode::Format, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::Io, what) {}
};

/// Inside a catch block: rethrows the active tpd::Error as the same type with
/// `context` prepended to its message. Other exceptions pass through untouched.
[[noreturn]] inline void rethrow_with_context(const std::string& context) {
  try {
    throw;
  } catch (const RankDeficiencyError& e) {
    throw RankDeficiencyError(e.deficient_dims(), e.dimension(), context + e.what());
  } catch (const DimensionError& e) {
    throw DimensionError(context + e.what());
  } catch (const DomainError& e) {
    throw DomainError(context + e.what());
  } catch (const DegenerateSampleError& e) {
    throw DegenerateSampleError(context + e.what());
  } catch (const ProtocolError& e) {
    throw ProtocolError(context + e.what());
  } catch (const FormatError& e) {
    throw FormatError(context + e.what());
  } catch (const IoError& e) {
    throw IoError(context + e.what());
  }
}

}  // namespace tpd
