#include "app.hpp"

int main(int argc, char** argv) { return xfl::cli::run(argc, argv); }
