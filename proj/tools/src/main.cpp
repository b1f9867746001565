#include "lgsim_cli/runner.hpp"

int main(int argc, char** argv) { return lgsim::cli::main_entry(argc, argv); }
