#include "minimax/cli.hpp"

int main(int argc, char** argv) { return minimax::cli::run(argc, argv); }
