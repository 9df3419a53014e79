#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace latinapprox {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Group operation applied to elements of a different model kind.
struct KindMismatch : Error {
    explicit KindMismatch(const std::string& msg) : Error(msg) {}
};

struct UnsupportedGeometry : Error {
    explicit UnsupportedGeometry(const std::string& msg) : Error(msg) {}
};

// Greedy cover could not produce a Hall-feasible instance at the given
// resolution; refine the resolution or enlarge the window.
struct CoverInfeasible : Error {
    explicit CoverInfeasible(const std::string& msg) : Error(msg) {}
};

// The Rado condition fails; carries a witnessing index subset I with
// measure(union of S_i, i in I) < sum of targets over I.
struct HallViolation : Error {
    std::vector<int> witness;
    std::string measure_lhs;  // measure of the union, as "p/q"
    std::string target_rhs;   // sum of targets, as "p/q"
    HallViolation(const std::string& msg, std::vector<int> w, std::string lhs, std::string rhs)
        : Error(msg), witness(std::move(w)), measure_lhs(std::move(lhs)), target_rhs(std::move(rhs)) {}
};

// Atoms are too coarse for any whole-atom allocation to stay within
// tolerance of the targets (or to populate every cell).
struct AtomTooCoarse : Error {
    explicit AtomTooCoarse(const std::string& msg) : Error(msg) {}
};

// Integer repair could not reach the target line sums on the given support;
// callers retry with a doubled target.
struct RoundingInfeasible : Error {
    explicit RoundingInfeasible(const std::string& msg) : Error(msg) {}
};

// Detachment got stuck. Valid inputs always realize, so this is a bug
// signal, not a recoverable condition.
struct RealizationFailed : Error {
    explicit RealizationFailed(const std::string& msg) : Error(msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace latinapprox
