#include "krtv/cli.hpp"

int main(int argc, char** argv) { return krtv::cli_main(argc, argv); }
