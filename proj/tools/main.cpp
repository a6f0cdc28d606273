#include "agingscope/cli.hpp"

int main(int argc, char** argv) { return agingscope::cli::main(argc, argv); }
