#include "icea/cli.hpp"

int main(int argc, char** argv) { return icea::run_cli(argc, argv); }
