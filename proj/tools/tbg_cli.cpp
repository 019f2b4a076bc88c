#include "tbg/cli.hpp"

int main(int argc, char** argv) { return tbg::run_cli(argc, argv); }
