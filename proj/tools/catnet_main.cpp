#include "catnet/cli.hpp"

int main(int argc, char** argv) { return catnet::run_cli(argc, argv); }
