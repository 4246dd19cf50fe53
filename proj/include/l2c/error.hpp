// Copyright 2026 The l2c Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace l2c {

/// Malformed container bytes. Carries the byte offset where parsing failed.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::uint64_t offset)
        : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::uint64_t offset() const { return offset_; }

private:
    std::uint64_t offset_;
};

class IoError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class ShapeError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class StateError : public std::logic_error {
    using std::logic_error::logic_error;
};

class ParameterError : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

class CodecError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Optimization produced a non-finite loss.
class DivergenceError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace l2c
