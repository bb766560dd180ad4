#include "lesionkit/cli.hpp"

int main(int argc, char** argv) { return lesionkit::cli::run(argc, argv); }
