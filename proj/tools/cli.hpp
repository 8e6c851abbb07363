#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace swifeed::cli {

/// Runs one command line (without the program name). Returns 0 on success,
/// 1 for domain errors and 2 for usage errors.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace swifeed::cli
