#pragma once

#include "gnep/outer.hpp"
#include "gnep/problems.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gnep {

/// Bad flags, unknown config keys, missing problems or mismatched x0.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string problem;       // catalog name or path to a problem file
    std::string x0 = "zero";   // preset label or comma-separated values
    OuterConfig outer;         // outer.mode selects general/variational
    std::string report;        // empty: report only on stdout
    std::string trace;         // empty: no trace file
    std::uint64_t seed = kQuad3Seed;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Flat `key = value` file; blank lines and `#` comments are ignored.
KeyValues read_config_file(const std::string& path);

/// Applies entries in order (later entries win). Recognized keys: problem,
/// x0, mode, umax, rho0, tau, gamma, eps, max-outer, report, trace, seed.
RunConfig make_run_config(const KeyValues& entries);

enum ExitCode : int {
    kExitSolved = 0,
    kExitUsage = 1,
    kExitInfeasible = 2,
    kExitSubsolverFailure = 3,
    kExitMaxOuter = 4,
};

int exit_code_for(Status status);

std::string table_header();

/// Fixed-width row: name, N, n, x0 label, k, i_total, R_f, R_o, R_c, rho_max.
/// Residuals use two significant digits; every numeric column shows "F"
/// unless the run ended in SolvedKKT.
std::string table_row(const std::string& name, std::size_t players, std::size_t dim,
                      const std::string& x0_label, const TerminationReport& report);

/// One JSON object per line for an iteration record, full precision.
std::string trace_line(const IterationRecord& record);

struct RunOutcome {
    int exit_code = kExitUsage;
    std::string report_text;  // table plus status lines (empty on usage errors)
    std::string error;
};

/// Loads the problem, solves it, and writes the report/trace files named in
/// the config. Usage errors produce exit code 1 and write nothing.
RunOutcome run(const RunConfig& config);

/// Runs every `*.cfg` file in `dir` concurrently. Reports and traces default
/// to `<stem>.report` / `<stem>.trace.jsonl` beside the config. Returns the
/// largest exit code.
int run_batch(const std::string& dir, std::string* summary = nullptr);

}  // namespace gnep
