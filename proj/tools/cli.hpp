#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace jointtag::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kDataInvalid = 2;
inline constexpr int kNumericFailure = 3;

// Runs one subcommand: validate-data, filter-data, train, evaluate, predict,
// replicate, gradcheck, synth. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace jointtag::cli
