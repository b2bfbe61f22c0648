#include "fgent/cli.hpp"

int main(int argc, char** argv) { return fgent::cli::run(argc, argv); }
