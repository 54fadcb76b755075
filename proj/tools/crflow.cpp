#include "crflow/cli.hpp"

int main(int argc, char** argv) { return crflow::cli_main(argc, argv); }
