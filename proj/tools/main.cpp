#include "cli.hpp"

int main(int argc, char** argv) { return snowgrid::cli::run(argc, argv); }
