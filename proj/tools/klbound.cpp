#include <iostream>

int main() {
  std::cout << "klbound: CLI under construction\n";
  return 2;
}
