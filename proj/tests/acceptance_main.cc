// Acceptance suite: one PASS/FAIL line per criterion. Optional arguments are the
// criterion ids to run; GEOEXTREMES_WORKERS sets the worker count.
#include <cstdlib>
#include <iostream>
#include <string>

#include "geoextremes/acceptance.hpp"

int main(int argc, char **argv)
{
  geoextremes::AcceptanceOptions opts;
  if (const char *w = std::getenv("GEOEXTREMES_WORKERS")) {
    opts.workers = static_cast<unsigned>(std::stoul(w));
  }
  for (int i = 1; i < argc; ++i) {
    opts.only.push_back(std::stoi(argv[i]));
  }
  const auto results = geoextremes::run_acceptance(opts, [](const geoextremes::CriterionResult &r) {
    std::cout << geoextremes::format_criterion(r) << std::endl;
  });
  int failed = 0;
  for (const auto &r : results) {
    failed += r.pass ? 0 : 1;
  }
  std::cout << (results.size() - failed) << "/" << results.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
