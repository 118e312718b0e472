#include "commands.hpp"

int main(int argc, char** argv) { return netlasso::cli::run(argc, argv); }
