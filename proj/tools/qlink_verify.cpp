#include "qlink/cli.hpp"

int main(int argc, char** argv) { return qlink::cli_main(argc, argv); }
