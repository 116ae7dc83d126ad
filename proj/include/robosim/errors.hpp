#pragma once

#include <stdexcept>
#include <string>

namespace robosim {

// Invalid inputs or configuration values (bad specs, rate mismatches, ...).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Tensor / layer shape mismatches.
class ShapeError : public std::runtime_error {
 public:
  explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed files; carries the byte offset where parsing failed when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t byte_offset = 0)
      : std::runtime_error(what), byte_offset(byte_offset) {}
  std::size_t byte_offset;
};

// Wire-format violations (bad magic, bad version, oversize payload).
class ProtocolError : public std::runtime_error {
 public:
  explicit ProtocolError(const std::string& what) : std::runtime_error(what) {}
};

// Socket-level failures (connect, timeout, peer reset).
class TransportError : public std::runtime_error {
 public:
  explicit TransportError(const std::string& what) : std::runtime_error(what) {}
};

// Viterbi dead-end: every path has -inf score.
class DecodeError : public std::runtime_error {
 public:
  explicit DecodeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace robosim
