#pragma once

#include <iosfwd>

namespace qrc::harness {

// Entry point of qrc_lab. Exit codes: 0 success, 1 invalid input or failed
// validation, 2 numerical or runtime failure (including interruption).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qrc::harness
