#include "splitting/cli.hpp"

int main(int argc, char** argv) { return splitting::cli::run(argc, argv); }
