#include "cli.hpp"

int main(int argc, char** argv) { return dfpc::cli::run(argc, argv); }
