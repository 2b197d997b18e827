#include <string>
#include <vector>

#include "demosal/cli.hpp"

int main(int argc, char** argv) {
  return demosal::cli_dispatch(std::vector<std::string>(argv + 1, argv + argc));
}
