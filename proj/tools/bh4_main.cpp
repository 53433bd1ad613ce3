#include <cstdio>

int main() {
  std::puts("bh4: command-line driver (subcommands land with the modules)");
  return 0;
}
