#pragma once

#include <stdexcept>
#include <string>

namespace hypatk {

// Base class for every error raised by the library. The category maps onto
// the CLI exit codes.
class Error : public std::runtime_error {
public:
    enum class Category { Config = 2, Data = 3, Numeric = 4 };

    Error(Category category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    Category category() const noexcept { return category_; }
    int exit_code() const noexcept { return static_cast<int>(category_); }

private:
    Category category_;
};

// Invalid parameters or configuration values.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(Category::Config, what) {}
};

// Malformed or missing input data (files, labels, shapes).
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(Category::Data, what) {}
};

// Non-finite values, degenerate denominators, solver failures.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(Category::Numeric, what) {}
};

// Raised when an operation would have to evaluate a gyrovector formula
// whose denominator has collapsed at the ball boundary.
class BoundaryError : public NumericError {
public:
    explicit BoundaryError(const std::string& what) : NumericError(what) {}
};

[[noreturn]] void throw_config(const std::string& what);
[[noreturn]] void throw_data(const std::string& what);

}  // namespace hypatk
