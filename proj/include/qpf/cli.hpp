#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qpf::cli {

// Process exit codes. Stable; documented in the README.
enum ExitCode : int {
    ok = 0,
    config = 2,      // bad command line, config file or parameters
    non_finite = 3,  // an orbit overflowed
    io = 4,          // reading or writing files failed
    numerical = 5,   // numerical procedure failed to produce a result
};

// Runs one command. `args` excludes the program name. Results go to `out`,
// diagnostics and provenance notes to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// 64-bit FNV-1a of the bytes, as 16 hex digits. Used for cache keys.
std::string content_hash(const std::string& bytes);

}  // namespace qpf::cli
