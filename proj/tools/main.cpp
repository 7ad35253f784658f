#include "cpcoh/cli.hpp"

int main(int argc, char** argv) { return cpcoh::cli::run(argc, argv); }
