#include <string>
#include <vector>

#include "uzvec/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return uzvec::run(std::move(args));
}
