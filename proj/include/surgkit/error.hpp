#pragma once

#include <stdexcept>
#include <string>

namespace surgkit {

// Base class for everything the toolkit throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Broken precondition or invariant: bad parameters, inconsistent data.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Filesystem / OS level failure (open, read, write).
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed input content. Carries the source name and, when known, the
// offending record (line number for text formats, element index otherwise).
class ParseError : public Error {
 public:
  ParseError(std::string source, long record, const std::string& message)
      : Error(format_message(source, record, message)),
        source_(std::move(source)),
        record_(record) {}

  const std::string& source() const { return source_; }
  long record() const { return record_; }  // -1 when not applicable

 private:
  static std::string format_message(const std::string& source, long record,
                                    const std::string& message) {
    std::string out = source;
    if (record >= 0) {
      out += ":" + std::to_string(record);
    }
    out += ": " + message;
    return out;
  }

  std::string source_;
  long record_;
};

}  // namespace surgkit
