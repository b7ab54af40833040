#pragma once

#include <stdexcept>
#include <string>

namespace nrsfm {

// Error taxonomy shared by the whole toolkit. The CLI maps these classes to
// exit codes, so a class is part of the public contract of an operation.
enum class ErrorClass {
  InvalidInput,
  DegenerateGeometry,
  DegenerateMotion,
  NumericalFailure,
  IdWidthOverflow,
  CorruptStream,
  IoError,
};

const char* to_string(ErrorClass c);

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what)
      : std::runtime_error(what), cls_(cls) {}
  ErrorClass error_class() const { return cls_; }

 private:
  ErrorClass cls_;
};

struct InvalidInput : Error {
  explicit InvalidInput(const std::string& w) : Error(ErrorClass::InvalidInput, w) {}
};
struct DegenerateGeometry : Error {
  explicit DegenerateGeometry(const std::string& w) : Error(ErrorClass::DegenerateGeometry, w) {}
};
struct DegenerateMotion : Error {
  explicit DegenerateMotion(const std::string& w) : Error(ErrorClass::DegenerateMotion, w) {}
};
struct NumericalFailure : Error {
  explicit NumericalFailure(const std::string& w) : Error(ErrorClass::NumericalFailure, w) {}
};
struct IdWidthOverflow : Error {
  explicit IdWidthOverflow(const std::string& w) : Error(ErrorClass::IdWidthOverflow, w) {}
};
struct CorruptStream : Error {
  explicit CorruptStream(const std::string& w) : Error(ErrorClass::CorruptStream, w) {}
};
struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorClass::IoError, w) {}
};

}  // namespace nrsfm
