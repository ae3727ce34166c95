#include "voxsar/cli/app.hpp"

int main(int argc, char **argv) { return voxsar::cli::run_cli(argc, argv); }
