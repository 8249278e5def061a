#include "cwmap/cli.hpp"

int main(int argc, char** argv) { return cwmap::cli::run(argc, argv); }
