#ifndef QUASISEG_CLI_HPP
#define QUASISEG_CLI_HPP

#include <iosfwd>

namespace quasiseg {

/// Runs one subcommand. Returns 0 on success, 1 on a usage error and 2 when
/// the input data is rejected.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int cli_main(int argc, const char* const* argv);

}  // namespace quasiseg

#endif  // QUASISEG_CLI_HPP
