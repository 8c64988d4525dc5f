#include "overtake/harness/cli.hpp"

int main(int argc, char** argv) { return overtake::harness::run_cli(argc, argv); }
