#include "snewton/harness.hpp"

int main(int argc, char** argv) { return snewton::cli_main(argc, argv); }
