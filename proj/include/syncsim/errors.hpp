#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace syncsim {

/// Base class for all domain errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Grid impedance is identically zero; SCR is undefined.
class ZeroImpedanceError : public Error {
public:
    ZeroImpedanceError() : Error("grid impedance is zero; SCR undefined") {}
};

/// Requested SCR cannot be met because the series resistance alone
/// already exceeds the required impedance magnitude.
class InfeasibleScrError : public Error {
public:
    InfeasibleScrError(double scr, double r_g)
        : Error("scr=" + std::to_string(scr) + " infeasible: r_g=" + std::to_string(r_g) +
                " ohm exceeds the required impedance magnitude") {}
};

/// The equivalent inertia denominator 1 - k_ppll*l_g*i_dref vanishes.
class SingularInertiaError : public Error {
public:
    SingularInertiaError() : Error("singular equivalent inertia: k_ppll*l_g*i_dref = 1") {}
};

/// No equilibrium power angle exists: |p_in| > u_g.
/// `margin` is |p_in| - u_g, positive by how much the driving term
/// exceeds the available voltage.
class NoEquilibriumError : public Error {
public:
    explicit NoEquilibriumError(double margin)
        : Error("no equilibrium: |p_in| exceeds u_g by " + std::to_string(margin) + " V"),
          margin_(margin) {}
    double margin() const noexcept { return margin_; }

private:
    double margin_;
};

/// cos(delta_0) = 0; the small-signal restoring term degenerates.
class DegenerateAngleError : public Error {
public:
    DegenerateAngleError() : Error("degenerate operating angle: cos(delta_0) = 0") {}
};

/// Root search interval does not straddle a sign change.
class NotBracketedError : public Error {
public:
    NotBracketedError() : Error("root not bracketed: same sign at both interval endpoints") {}
};

/// Damping design envelope contains no operating points.
class EmptyEnvelopeError : public Error {
public:
    EmptyEnvelopeError() : Error("empty operating envelope") {}
};

/// Fewer than three oscillation extrema above the noise floor.
class InsufficientOscillationError : public Error {
public:
    explicit InsufficientOscillationError(int n_found)
        : Error("insufficient oscillation: " + std::to_string(n_found) +
                " extrema found, need at least 3") {}
};

/// A plot was requested with no series or with a series of fewer than two points.
class EmptySeriesError : public Error {
public:
    EmptySeriesError() : Error("plot requires at least one series with at least two points") {}
};

/// Scenario definition violates its structural invariants.
class ScenarioError : public Error {
public:
    explicit ScenarioError(const std::string& what) : Error("invalid scenario: " + what) {}
};

/// Malformed configuration text. Carries the offending key (when known)
/// and the 1-based line number (when recoverable from the parser).
class ParseError : public Error {
public:
    ParseError(std::string key, int line, const std::string& detail)
        : Error("config parse error" + (key.empty() ? "" : " at key '" + key + "'") +
                (line > 0 ? " (line " + std::to_string(line) + ")" : "") + ": " + detail),
          key_(std::move(key)),
          line_(line) {}
    const std::string& key() const noexcept { return key_; }
    int line() const noexcept { return line_; }

private:
    std::string key_;
    int line_;
};

/// One violated invariant, reported by field.
struct Violation {
    std::string field;
    std::string message;
};

/// Configuration parsed cleanly but the values violate model invariants.
class ConfigValidationError : public Error {
public:
    explicit ConfigValidationError(std::vector<Violation> violations)
        : Error(describe(violations)), violations_(std::move(violations)) {}
    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    static std::string describe(const std::vector<Violation>& vs) {
        std::string s = "invalid configuration:";
        for (const auto& v : vs) s += "\n  " + v.field + ": " + v.message;
        return s;
    }
    std::vector<Violation> violations_;
};

}  // namespace syncsim
