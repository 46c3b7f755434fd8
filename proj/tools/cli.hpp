#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "esn2/params.hpp"

namespace esn2::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitUsage = 2,
  kExitCubature = 3,
  kExitNotConverged = 4,
};

/// Bad flags or input; reported with exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs the esn2 command line. Output goes to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// 17 significant digits, '.' as decimal point whatever the locale.
std::string format_number(double v);

/// Strict decimal parse of a whole field (surrounding blanks allowed).
std::optional<double> parse_number(std::string_view text);

/// Two comma-separated columns (y1, y2). A first row that does not parse as
/// numbers is taken as a header. Blank lines are skipped. Errors name the row.
Dataset read_table(std::istream& in);
Dataset read_table_file(const std::string& path);

/// sqrt(diag(info^-1) / n), or nothing when info is singular or not positive
/// definite to working precision.
std::optional<ParamVector> standard_errors(const Matrix8& info, std::size_t n);

/// Rough starting point for the MLE: marginal method-of-moments estimates
/// of a skew-normal fit, with tau = 0.
DpParams moment_start(const Dataset& data);

}  // namespace esn2::cli
