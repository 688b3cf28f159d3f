#include "lvc/cli.h"

int main(int argc, char** argv) { return lvc::run_cli(argc, argv); }
