#pragma once

#include <stdexcept>
#include <string>

namespace torogrow {

// Input that violates a documented precondition (bad vectors, bad config values).
// The CLI maps this family to exit code 1.
class InputError : public std::invalid_argument {
public:
    explicit InputError(const std::string& msg) : std::invalid_argument(msg) {}
};

// A computation detected that the mathematical structure it relies on does not
// hold (matrix is not square-zero, return time varies, level curve closed...).
// The CLI maps this family to exit code 2.
class StructuralError : public std::runtime_error {
public:
    explicit StructuralError(const std::string& msg) : std::runtime_error(msg) {}
};

// A stated hypothesis of a construction fails on the given data
// (e.g. the first integral does not satisfy its commutation relation).
class HypothesisError : public StructuralError {
public:
    explicit HypothesisError(const std::string& msg) : StructuralError(msg) {}
};

}  // namespace torogrow
