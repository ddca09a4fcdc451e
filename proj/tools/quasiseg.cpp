#include "quasiseg/cli.hpp"

int main(int argc, char** argv) { return quasiseg::cli_main(argc, argv); }
