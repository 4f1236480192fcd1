#include "hdrpmp_cli.hpp"

int main(int argc, char** argv) { return hdrpmp::cli::run(argc, argv); }
