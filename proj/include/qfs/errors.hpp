// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qfs {

/// Malformed textual input. position is a 0-based byte offset (or line number
/// for line-oriented formats, see the thrower).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t position)
        : std::runtime_error(what + " (at " + std::to_string(position) + ")"), position_(position) {}
    [[nodiscard]] std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// A mathematical precondition was violated by the caller: wrong degree,
/// field overflow, non-prime modulus and the like.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An internal arithmetic invariant failed (for example an inexact division
/// that must be exact). Always a bug, never bad input.
class ArithmeticInvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace qfs
