#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace parabolic {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A map, polynomial or linear change that violates its structural invariants.
struct invalid_map : error {
    using error::error;
};

/// Family parameters outside the hypotheses the family is defined for.
struct family_error : error {
    using error::error;
};

struct parse_error : error {
    parse_error(std::size_t pos, const std::string& what)
        : error("parse error at " + std::to_string(pos) + ": " + what), position(pos) {}
    std::size_t position;
};

/// Every direction is characteristic (r vanishes identically).
struct dicritical_error : error {
    dicritical_error() : error("dicritical map: every direction is characteristic") {}
};

struct undefined_director : error {
    using error::error;
};

/// Orbit magnitude exceeded the overflow guard during plain iteration.
struct escape_error : error {
    escape_error(long long at_step)
        : error("orbit escaped (magnitude > 1e100) at step " + std::to_string(at_step)), step(at_step) {}
    long long step;
};

struct invalid_argument : error {
    using error::error;
};

}  // namespace parabolic
