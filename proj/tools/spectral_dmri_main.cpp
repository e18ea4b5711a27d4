#include "sdmri/cli.hpp"

int main(int argc, char** argv) { return sdmri::cli::main_cli(argc, argv); }
