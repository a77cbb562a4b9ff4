#pragma once

namespace qflow {

// Every numeric tolerance used by the pipeline lives here so that the CLI
// can surface them as flags.
struct Tolerances {
  // Absolute primal feasibility per constraint row.
  double feas = 1e-7;
  // Objective tolerance, scaled as obj * (1 + |objective|).
  double obj = 1e-7;
  // Residual flows at or below eps count as zero during path extraction.
  double eps = 1e-9;

  double objective_slack(double objective) const {
    return obj * (1.0 + (objective < 0 ? -objective : objective));
  }
};

}  // namespace qflow
