#pragma once

#include <stdexcept>
#include <string>

namespace cwmap {

enum class Err {
  OutOfBounds,
  DegeneratePolygon,
  InvalidInterval,
  GenerationFailed,
  ParseError,
  SchemaVersionMismatch,
  BadMagic,
  TruncatedFile,
  ChecksumMismatch,
  IoError,
  ShapeMismatch,
  EmptyMask,
  SliceDegenerate,
  EmptyCorridor,
  WindowTooShort,
  GridMismatch,
  RoadMismatch,
};

const char* err_name(Err e);

class Error : public std::runtime_error {
 public:
  Error(Err code, const std::string& msg);
  Err code() const { return code_; }

 private:
  Err code_;
};

[[noreturn]] void fail(Err code, const std::string& msg);

}  // namespace cwmap
