#include "invlab/cli.hpp"

int main(int argc, char** argv) {
  return invlab::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
