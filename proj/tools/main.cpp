#include "cli.hpp"

int main(int argc, char** argv) { return cxg::run_cli(argc, argv); }
