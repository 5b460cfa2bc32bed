#include "lfz/cli/run.hpp"

int main(int argc, char** argv) { return lfz::cli::run(std::vector<std::string>(argv, argv + argc)); }
