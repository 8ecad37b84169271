#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace unscientify {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input line; line numbers are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// Pattern source rejected. rule_id is empty for library-level problems.
class CompileError : public Error {
 public:
  CompileError(std::string rule_id, std::string field, const std::string& what)
      : Error(format(rule_id, field, what)),
        rule_id_(std::move(rule_id)),
        field_(std::move(field)) {}
  const std::string& rule_id() const { return rule_id_; }
  const std::string& field() const { return field_; }

 private:
  static std::string format(const std::string& id, const std::string& field,
                            const std::string& what) {
    std::string out = "compile error";
    if (!id.empty()) out += " in rule '" + id + "'";
    if (!field.empty()) out += " field '" + field + "'";
    return out + ": " + what;
  }
  std::string rule_id_;
  std::string field_;
};

class LoadError : public Error {
 public:
  using Error::Error;
};

}  // namespace unscientify
