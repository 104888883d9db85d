#include "cli.hpp"

int main(int argc, char** argv) { return bvn::cli::run_main(argc, argv); }
