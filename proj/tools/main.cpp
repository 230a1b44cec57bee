#include "experiments.hpp"

int main(int argc, char** argv) { return radarkit::app::cli_main(argc, argv); }
