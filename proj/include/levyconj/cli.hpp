#pragma once

#include <string>
#include <vector>

namespace levyconj::cli {

/// Dispatches the command line: subcommands invert, map, iterate, conjugate,
/// check, charfn, simulate, validate. Exit codes: 0 success, 1 verdict-no,
/// 2 inconclusive, 3 input error, 4 numeric failure.
int run(const std::vector<std::string>& args);
int run(int argc, const char* const* argv);

}  // namespace levyconj::cli
