#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "farfel/sema.hpp"

namespace farfel {

// Process exit codes shared by the CLI and the test harness.
inline constexpr int kExitOk = 0;
inline constexpr int kExitBadInput = 2; // unreadable file, parse/sema error, bad --set name
inline constexpr int kExitRuntime = 3;
inline constexpr int kExitVerifyFail = 4;
inline constexpr int kExitUsage = 64;

enum class OutputFormat { Text, Structured };

struct DriverOptions {
    std::vector<std::pair<std::string, Value>> overrides; // --set pairs, in order
    OutputFormat format = OutputFormat::Text;
    bool dump_tapes = false;       // print each reverse tape as its block finishes
    double time_limit_seconds = 0; // 0 disables the deadline
};

// Reads, tokenizes, parses and resolves one source file. Prints every
// diagnostic to err as `file:line:col: phase: message` and returns empty
// on any failure.
std::optional<BoundProgram> load_program(const std::string& path, std::ostream& err);

// The `run` command (and `dump-tape`, via opt.dump_tapes): executes the
// PROGRAM unit. Text format writes one line per PRINT with the values
// space-separated; structured format writes one `NAME VALUE` line per
// printed value, reals with 17 significant digits.
int run_file(const std::string& path, const DriverOptions& opt, std::ostream& out,
             std::ostream& err);

// The `dump-ast` command: parses only, then writes the canonical form.
// Reparsing the output reproduces the same tree.
int dump_ast(const std::string& path, std::ostream& out, std::ostream& err);

// One captured PRINT value: the printed expression's text (spaces
// removed) and its numeric result.
struct RunRecord {
    std::string name;
    double value = 0;
};

// Like run_file, but collects every numeric printed value instead of
// writing to a stream. Diagnostics still go to err.
int run_capture(const std::string& path, const DriverOptions& opt,
                std::vector<RunRecord>& records, std::ostream& err);

// The `verify` command: runs every entry of a corpus manifest and checks
// the captured values against its expectations (absolute tolerance,
// last printed record of each name wins). One ok/FAIL line per check.
int verify_manifest(const std::string& path, std::ostream& out, std::ostream& err);

} // namespace farfel
