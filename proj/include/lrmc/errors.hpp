#pragma once

#include <stdexcept>
#include <string>

namespace lrmc {

/// Bad arguments or inputs that violate a documented precondition.
class InvalidInputError : public std::invalid_argument {
 public:
  explicit InvalidInputError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Evaluation outside the mathematical domain (e.g. log of a zero
/// probability at an observed transition).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& msg) : std::domain_error(msg) {}
};

/// An iterative method exhausted its iteration budget. Carries the last
/// residual so callers can report how close the run got.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& msg, double residual)
      : std::runtime_error(msg), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// The penalty schedule ended without reaching the target rank.
class RankFailureError : public std::runtime_error {
 public:
  RankFailureError(const std::string& msg, int achieved_rank)
      : std::runtime_error(msg), achieved_rank_(achieved_rank) {}
  int achieved_rank() const { return achieved_rank_; }

 private:
  int achieved_rank_;
};

/// Malformed text input; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, long line)
      : std::runtime_error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace lrmc
