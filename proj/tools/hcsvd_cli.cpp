#include <hcsvd/cli.hpp>

int main(int argc, char** argv) { return hcsvd::cli::run(argc, argv); }
