#pragma once

// Command-line front end: eval, surface and verify subcommands.

#include "annulus/function.hpp"

#include <iosfwd>
#include <string_view>
#include <vector>

namespace annulus::cli {

enum ExitCode : int {
    kOk = 0,
    kInputError = 1,
    kNonConvergence = 2,
    kVerificationFailure = 3,
};

/// DSL text, or `rational: scale; (root, mult); ...` where scale and roots are
/// constant DSL expressions. DSL input that is rational (no exp of z) is
/// returned in factored form so the exact counting paths apply.
FunctionModel parseFunctionSpec(std::string_view spec);

/// `lo:hi:n`, n points spaced evenly in log between lo and hi (inclusive).
std::vector<double> parseGrid(std::string_view spec);

/// Full double precision, scientific, locale independent.
std::string formatNumber(double v);

/// Runs the tool; returns the process exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace annulus::cli
