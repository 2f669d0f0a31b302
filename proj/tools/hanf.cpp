#include "hanf/cli.hpp"

int main(int argc, char** argv) { return hanf::cli::run(argc, argv); }
