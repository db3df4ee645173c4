#include "wikiref/cli.hpp"

int main(int argc, char** argv) { return wikiref::cli::run_cli(argc, argv); }
