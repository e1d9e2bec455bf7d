// Runs checks A1..A11 and prints one PASS/FAIL line per check.
// Optional argument: a suite name (all, fast, A1..A11).

#include <iostream>

#include "sinr/verify.hpp"

int main(int argc, char** argv) {
  const std::string suite = argc > 1 ? argv[1] : "all";
  int failed = 0;
  try {
    sinr::verify::run_suite(suite, [&](const sinr::verify::CheckResult& r) {
      std::cout << sinr::verify::format(r) << std::endl;
      if (!r.passed) ++failed;
    });
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
  std::cout << (failed ? std::to_string(failed) + " check(s) failed" : std::string("all checks passed")) << '\n';
  return failed ? 1 : 0;
}
