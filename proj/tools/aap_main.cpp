#include "aap/bench.hpp"

int main(int argc, char** argv) { return aap::bench::run_cli(argc, argv); }
