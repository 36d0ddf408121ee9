#pragma once

#include <stdexcept>
#include <string>

namespace tabsynth {

// Malformed input files (CSV, JSON). Message carries the line number when known.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Data violates a declared or inferred schema contract.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A metric could not be computed at all (e.g. every regression skipped).
struct MetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised by the trainer when a loss turns non-finite; message carries diagnostics.
struct TrainingDiverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace tabsynth
