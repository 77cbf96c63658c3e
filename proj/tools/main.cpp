#include <string>
#include <vector>

#include "delaywave/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return delaywave::cli_run(args);
}
