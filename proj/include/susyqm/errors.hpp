#pragma once

#include <stdexcept>
#include <string>

namespace susyqm {

/// Raised when a parameter point violates a potential's admissibility
/// predicate; the message names the failed constraint.
class ConstraintError : public std::runtime_error {
public:
    explicit ConstraintError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a grid is malformed or an operation would run on an
/// empty set of trusted points.
class GridError : public std::runtime_error {
public:
    explicit GridError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when two functions share too few trusted points to compare.
class InsufficientDataError : public std::runtime_error {
public:
    explicit InsufficientDataError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace susyqm
