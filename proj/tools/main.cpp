#include "cli_app.hpp"

int main(int argc, char** argv) { return choicekit::cli::run(argc, argv); }
