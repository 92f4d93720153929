#include <string>
#include <vector>

#include "tmkit/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return tmkit::cli::run(std::move(args));
}
