#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fatou::cli {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kMismatch = 2;
inline constexpr int kHypothesisNotMet = 3;
inline constexpr int kUndetermined = 4;
inline constexpr int kUsage = 64;
inline constexpr int kData = 65;
inline constexpr int kIo = 74;
}  // namespace exit_code

/// Runs the command line `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fatou::cli
