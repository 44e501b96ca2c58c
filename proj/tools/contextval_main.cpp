#include "ctxval/cli.hpp"

int main(int argc, char** argv) { return ctxval::run_cli(argc, argv); }
