#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace cxg {

// Base of every error raised by the library. The CLI maps these to the
// "input error" exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed UTF-8 in an input stream.
class DecodeError : public Error {
 public:
  explicit DecodeError(std::size_t byte_offset)
      : Error("invalid UTF-8 at byte offset " + std::to_string(byte_offset)),
        byte_offset_(byte_offset) {}
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

// A line-oriented file failed to parse.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A construction spec line is invalid. Column is 1-based, counted in bytes.
class SpecError : public Error {
 public:
  SpecError(std::size_t column, const std::string& what)
      : Error("column " + std::to_string(column) + ": " + what), column_(column) {}
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

class DuplicateError : public Error {
 public:
  using Error::Error;
};

// A sentence lacks a facet kind (e.g. semantic clusters) that the inventory
// constrains.
class FacetMissingError : public Error {
 public:
  FacetMissingError(std::uint32_t sentence_id, const std::string& facet)
      : Error("sentence " + std::to_string(sentence_id) + " has no " + facet +
              " annotation but the inventory uses " + facet + " slots"),
        sentence_id_(sentence_id) {}
  std::uint32_t sentence_id() const { return sentence_id_; }

 private:
  std::uint32_t sentence_id_;
};

class EmptyCorpusError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what)
      : Error(path + ": " + what) {}
};

}  // namespace cxg
