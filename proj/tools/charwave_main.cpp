#include <string>
#include <vector>

#include "charwave/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return charwave::dispatch(args);
}
