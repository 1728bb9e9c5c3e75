#include "breglr/cli.hpp"

int main(int argc, char** argv) { return breglr::cli::run(argc, argv); }
