#include "gpolylab/cli.hpp"

int main(int argc, char** argv) { return gpolylab::cli::run(argc, argv); }
