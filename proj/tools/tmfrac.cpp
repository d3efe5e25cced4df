#include "tmfrac/cli.hpp"

int main(int argc, char** argv) {
  return tmfrac::run_cli(argc, argv);
}
