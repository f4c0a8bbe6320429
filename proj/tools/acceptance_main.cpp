// Acceptance battery: one line per criterion, exit status 0 iff all pass.
//   acceptance [--only tag,tag] [--seed N]

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "impulsive/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<std::string> only;
  std::uint64_t seed = 1;
  bool list = false;
  app.add_option("--only", only, "criterion tags or numbers")->delimiter(',');
  app.add_option("--seed", seed, "random seed");
  app.add_flag("--list", list, "print the criteria and exit");
  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (const auto& c : impulsive::acceptance::criteria()) std::cout << c.id << "  " << c.name << "  " << c.title << "\n";
    return 0;
  }
  const auto res = impulsive::acceptance::run(only, seed);
  if (res.empty()) {
    std::cerr << "no criterion matches --only\n";
    return 1;
  }
  for (const auto& r : res) std::cout << impulsive::acceptance::format(r) << std::endl;
  const auto passed = std::count_if(res.begin(), res.end(), [](const auto& r) { return r.pass; });
  std::cout << passed << "/" << res.size() << " criteria passed\n";
  return passed == static_cast<long>(res.size()) ? 0 : 1;
}
