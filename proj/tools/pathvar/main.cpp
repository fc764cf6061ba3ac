#include "app.hpp"

int main(int argc, char** argv) { return pathvar::cli::main_entry(argc, argv); }
