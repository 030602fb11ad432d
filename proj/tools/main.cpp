#include "oatk/app/cli.hpp"

int main(int argc, char** argv) { return oatk::app::cli_main(argc, argv); }
