#ifndef ICEA_CLI_HPP
#define ICEA_CLI_HPP

namespace icea {

// Exit codes: 0 converged/ok, 2 update budget exhausted, 1 any error.
int run_cli(int argc, const char* const* argv);

}  // namespace icea

#endif
