#pragma once

#include <stdexcept>
#include <string>

namespace dcee {

// Failure categories double as process exit codes for the CLI.
enum class ErrorCategory : int {
    Validation = 2,
    Domain = 3,
    Numerical = 4,
    Io = 5,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    [[nodiscard]] ErrorCategory category() const noexcept { return category_; }
    [[nodiscard]] int exit_code() const noexcept { return static_cast<int>(category_); }

  private:
    ErrorCategory category_;
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& what) : Error(ErrorCategory::Validation, what) {}
};

struct DomainError : Error {
    explicit DomainError(const std::string& what) : Error(ErrorCategory::Domain, what) {}
};

struct NumericalError : Error {
    explicit NumericalError(const std::string& what) : Error(ErrorCategory::Numerical, what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error(ErrorCategory::Io, what) {}
};

} // namespace dcee
