#include <string>
#include <vector>

#include "ptframe/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return ptframe::cli::run(args);
}
