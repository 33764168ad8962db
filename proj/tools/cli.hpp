#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rgtlps::cli {

enum ExitCode { kSuccess = 0, kInputError = 1, kNotConverged = 2 };

// Observations read from a text file, in file order.
struct Dataset {
  std::vector<double> values;
  std::string source_path;
  // 1-based line number of each value.
  std::vector<std::size_t> lines;
  std::size_t clamped = 0;
};

// One or more numbers per line separated by commas or whitespace; a first
// non-empty line starting with a non-numeric token is a header. With
// clamp_eps > 0, values in [0, eps) and (1 - eps, 1] are moved to eps and
// 1 - eps; anything else outside (0, 1) is rejected.
Dataset load_dataset(const std::string& path, double clamp_eps = 0.0);

// Runs the command line; output goes to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rgtlps::cli
