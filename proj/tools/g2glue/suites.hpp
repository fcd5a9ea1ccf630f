#pragma once

#include <functional>
#include <string>
#include <vector>

#include "config.hpp"
#include "report.hpp"

namespace g2glue::cli {

Report eh_verify(const RunConfig& cfg);
Report eh_decay(const RunConfig& cfg);
Report cone_rates(const RunConfig& cfg);
Report cone_index(const RunConfig& cfg);
Report cone_oracle(const RunConfig& cfg);
Report rates_jk(const RunConfig& cfg);
Report kummer_fixed_points(const RunConfig& cfg);
Report kummer_torsion(const RunConfig& cfg);
/// Also writes the binary field dump when cfg.torus_dump is set.
Report torus_solve(const RunConfig& cfg);

/// Called with each acceptance check as soon as it is decided, with the seconds it
/// took (0 for supplementary lines).
using CheckSink = std::function<void(const Check&, double)>;

/// Criteria 1 to 10 with pinned parameters, each followed by its supplementary lines.
/// Criterion checks are named "criterion N: ..."; time budgets are part of the verdict.
Report acceptance(const CheckSink& sink = {});

struct SuiteEntry {
  std::string path;  ///< e.g. "cone rates"
  Report (*run)(const RunConfig&);
};

const std::vector<SuiteEntry>& suites();

}  // namespace g2glue::cli
