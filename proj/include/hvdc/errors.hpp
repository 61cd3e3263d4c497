#pragma once

#include <stdexcept>
#include <string>

namespace hvdc {

/// Base class for every error raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error { using Error::Error; };
class NoSolution : public Error { using Error::Error; };
class DegenerateModel : public Error { using Error::Error; };
class DimensionMismatch : public Error { using Error::Error; };
class StructureViolation : public Error { using Error::Error; };
class NonFinite : public Error { using Error::Error; };

/// Listed overlap angle and the one implied by the commutation equation differ.
class InconsistentOverlap : public Error {
 public:
  InconsistentOverlap(const std::string& what, double table_mu,
                      double solved_mu)
      : Error(what), table_mu_(table_mu), solved_mu_(solved_mu) {}
  double table_mu() const { return table_mu_; }
  double solved_mu() const { return solved_mu_; }

 private:
  double table_mu_;
  double solved_mu_;
};

class NotStabilizable : public Error { using Error::Error; };
class NotDetectable : public Error { using Error::Error; };
class NoStableSubspace : public Error { using Error::Error; };
class NotStabilizing : public Error { using Error::Error; };
class SynthesisFailed : public Error { using Error::Error; };
class UnknownCase : public Error { using Error::Error; };

class UnstableBlowup : public Error { using Error::Error; };
class StepTooLarge : public Error { using Error::Error; };
class FileFormat : public Error { using Error::Error; };

/// Configuration problem; carries the offending key and its source line.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::string key = {}, int line = -1)
      : Error(what), key_(std::move(key)), line_(line) {}
  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

}  // namespace hvdc
