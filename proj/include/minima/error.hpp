#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace minima {

/// Non-finite or out-of-domain numeric input.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A caller violated a documented precondition (shapes, symmetry, sizes).
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A non-finite value appeared while evaluating a network.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, std::size_t layer)
        : std::runtime_error(what + " (layer " + std::to_string(layer) + ")"), layer_(layer) {}
    std::size_t layer() const noexcept { return layer_; }

private:
    std::size_t layer_;
};

/// Malformed input file. line is 1-based; 0 when not attributable to a line.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Well-formed input that fails a semantic check (probability sums, configs).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace minima
