#pragma once

#include <stdexcept>
#include <string>

namespace pairrank {

/// Invalid argument (bad node index, out-of-range probability, ...).
struct parameter_error : std::invalid_argument {
    explicit parameter_error(const std::string& what) : std::invalid_argument(what) {}
};

/// A probability estimate of 0 or 1 would map to an infinite logit.
struct degenerate_estimate_error : std::runtime_error {
    explicit degenerate_estimate_error(const std::string& what) : std::runtime_error(what) {}
};

/// Inconsistent run configuration (e.g. a ground-truth stopping rule without ground truth).
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative routine failed to converge within its cap.
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file; message carries the line number.
struct parse_error : std::runtime_error {
    explicit parse_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace pairrank
