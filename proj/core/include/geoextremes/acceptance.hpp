#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace geoextremes {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  /// Measured values next to their pinned tolerances.
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  /// Worker threads for replicate loops; 0 means all hardware threads.
  unsigned workers = 0;
  /// Criteria to run; empty runs all of 1..13.
  std::vector<int> only;
};

inline constexpr int kAcceptanceCriteria = 13;

/// Short name of criterion `id`.
std::string acceptance_name(int id);

/**
 * Runs the acceptance criteria with fixed seeds and pinned tolerances. Each
 * result is passed to `on_result` as soon as it is available. An exception
 * inside a criterion marks it failed with the message as detail.
 */
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions &options,
                                            const std::function<void(const CriterionResult &)> &on_result = {});

/// One line per criterion: PASS/FAIL, id, name, seconds, detail.
std::string format_criterion(const CriterionResult &result);

}  // namespace geoextremes
