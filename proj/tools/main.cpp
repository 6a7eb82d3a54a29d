#include "cli.hpp"

int main(int argc, char** argv) { return tgclstm::cli_main(argc, argv); }
