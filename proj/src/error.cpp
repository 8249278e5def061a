#include "cwmap/error.hpp"

namespace cwmap {

const char* err_name(Err e) {
  switch (e) {
    case Err::OutOfBounds: return "OutOfBounds";
    case Err::DegeneratePolygon: return "DegeneratePolygon";
    case Err::InvalidInterval: return "InvalidInterval";
    case Err::GenerationFailed: return "GenerationFailed";
    case Err::ParseError: return "ParseError";
    case Err::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case Err::BadMagic: return "BadMagic";
    case Err::TruncatedFile: return "TruncatedFile";
    case Err::ChecksumMismatch: return "ChecksumMismatch";
    case Err::IoError: return "IoError";
    case Err::ShapeMismatch: return "ShapeMismatch";
    case Err::EmptyMask: return "EmptyMask";
    case Err::SliceDegenerate: return "SliceDegenerate";
    case Err::EmptyCorridor: return "EmptyCorridor";
    case Err::WindowTooShort: return "WindowTooShort";
    case Err::GridMismatch: return "GridMismatch";
    case Err::RoadMismatch: return "RoadMismatch";
  }
  return "Unknown";
}

Error::Error(Err code, const std::string& msg)
    : std::runtime_error(std::string(err_name(code)) + ": " + msg), code_(code) {}

void fail(Err code, const std::string& msg) { throw Error(code, msg); }

}  // namespace cwmap
