#pragma once

#include <string>
#include <vector>

namespace qflow {

// One failed check. `slack` is signed: negative means the constraint is
// violated by that amount; zero when the check is not quantitative.
struct Violation {
  std::string kind;
  std::string where;
  double slack = 0.0;
};

using ValidationReport = std::vector<Violation>;

}  // namespace qflow
