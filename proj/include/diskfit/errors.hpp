#pragma once

#include <stdexcept>
#include <string>

namespace diskfit {

// Broad failure categories; the CLI maps these onto process exit codes.
enum class ErrorCode {
    InvalidInput,        // bad configuration or argument values
    DimensionError,      // image too small for the requested kernel
    DegenerateHistogram, // all values identical, no threshold exists
    InsufficientEdges,   // fewer than 3 candidate edge pixels
    DegenerateGeometry,  // normals effectively parallel / collinear points
    PolarityMismatch,    // closed form returned non-positive radius
    NumericalFailure,    // non-finite objective during iteration
    ClassCollapse,       // EM class effective count dropped below 3
    IoError,             // file read/write failure
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

    const char* code_name() const noexcept {
        switch (code_) {
        case ErrorCode::InvalidInput: return "invalid_input";
        case ErrorCode::DimensionError: return "dimension_error";
        case ErrorCode::DegenerateHistogram: return "degenerate_histogram";
        case ErrorCode::InsufficientEdges: return "insufficient_edges";
        case ErrorCode::DegenerateGeometry: return "degenerate_geometry";
        case ErrorCode::PolarityMismatch: return "polarity_mismatch";
        case ErrorCode::NumericalFailure: return "numerical_failure";
        case ErrorCode::ClassCollapse: return "class_collapse";
        case ErrorCode::IoError: return "io_error";
        }
        return "unknown";
    }

  private:
    ErrorCode code_;
};

} // namespace diskfit
