#include "cli.hpp"

int main(int argc, char** argv) { return expframe::cli::main(argc, argv); }
