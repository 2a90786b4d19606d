#include <vector>

#include "onto/cli.hpp"

int main(int argc, char** argv) {
  return onto::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
