#pragma once

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace polyflow {

// Bad caller input: malformed instance, negative loads, unknown oracle kind.
// CLI exit code 1.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// A computed quantity violated an internal invariant that should hold for
// every valid input (e.g. an online allocation left the polymatroid).
// CLI exit code 2.
struct InvariantError : std::runtime_error {
    explicit InvariantError(const std::string& what) : std::runtime_error(what) {}
};

// The request is valid but exceeds what a backend can do (instance too large
// for an exhaustive routine). CLI exit code 3.
struct CapabilityError : std::runtime_error {
    explicit CapabilityError(const std::string& what) : std::runtime_error(what) {}
};

// Base tolerance for tightness/equality tests. Overridable via POLYFLOW_TOL.
inline double base_tolerance() {
    static const double tol = [] {
        if (const char* s = std::getenv("POLYFLOW_TOL")) {
            char* end = nullptr;
            double v = std::strtod(s, &end);
            if (end != s && v > 0) return v;
        }
        return 1e-9;
    }();
    return tol;
}

// A set S is tight for load x when f(S) - x(S) <= tightness_slack(f(S)).
inline double tightness_slack(double f_value) {
    double m = f_value < 1.0 ? 1.0 : f_value;
    return base_tolerance() * m;
}

}  // namespace polyflow
