#ifndef ASID_HARNESS_SWEEP_H_
#define ASID_HARNESS_SWEEP_H_

#include <filesystem>
#include <string>
#include <vector>

#include "asid/harness/config.h"
#include "asid/policy.h"

namespace asid::harness {

// Rows keyed by (label, x). CSV layout: label,x,<metric columns>.
struct ResultTable {
  struct Row {
    std::string label;
    double x = 0.0;
    std::vector<double> values;
  };
  std::vector<std::string> metrics;
  std::vector<Row> rows;

  int MetricIndex(const std::string& name) const;  // throws ConfigError
};

void WriteCsv(const ResultTable& table, const std::filesystem::path& path);
ResultTable ReadCsv(const std::filesystem::path& path);

struct SweepResult {
  // Per (policy, cell): contact_rate, displacement, regions, reach2_rate,
  // and on a theta grid abs_error.
  ResultTable table;
  // Per (policy, bin centre): visit count and frequency of
  // state[state_index] over all recorded states.
  ResultTable visitation;
  Policy fisher_policy;
};

// Evaluates one trained Fisher exploration policy and fresh random policies
// across the grid. Episode e of a cell uses the same noise seed and theta
// draw for both policies.
SweepResult RunSweep(const ExperimentConfig& cfg);

// Writes sweep.csv, visitation.csv, the policy record and one heatmap per
// metric into dir.
void WriteSweep(const SweepResult& result, const std::filesystem::path& dir);

// SVG heatmap: one row per label, one column per x, colour by metric. Each
// cell prints the value exactly as in the CSV. Throws ConfigError on an
// empty table or unknown metric.
std::string RenderHeatmap(const ResultTable& table, const std::string& metric);

}  // namespace asid::harness

#endif  // ASID_HARNESS_SWEEP_H_
