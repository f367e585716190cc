#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mnn::cli {

/// Runs one command line (without the program name). Returns the exit status.
/// On failure a single line is written to `err`:
///   mnn-error class=<class> message="<text>"
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Hex SHA-256 of a file's bytes.
std::string file_sha256(const std::string& path);

}  // namespace mnn::cli
