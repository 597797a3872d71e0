#include "docrepair/pipeline.hpp"

int main(int argc, char** argv) { return docrepair::run_cli(argc, argv); }
