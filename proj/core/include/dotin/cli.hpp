#ifndef DOTIN_CLI_HPP
#define DOTIN_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace dotin {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitBadConfig = 3;

/// Entry point of the `dotin` tool. `args` excludes the program name.
///
///   train     --config FILE [--set k=v]... [--seed N] [--runs DIR] [--name NAME]
///   eval      --run DIR
///   bench     --config FILE --ratios 0.1,0.5,0.9 [--strategies ...] [--seeds ...] [--timing]
///   analyze   --run DIR [--export-attentiveness] [--drop-plans]
///   make-data --config FILE --out DIR
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dotin

#endif  // DOTIN_CLI_HPP
