#include "improbe/cli.hpp"

int main(int argc, char** argv) { return improbe::cli::run_command(argc, argv); }
