#include "levyconj/cli.hpp"

int main(int argc, char** argv) { return levyconj::cli::run(argc, argv); }
