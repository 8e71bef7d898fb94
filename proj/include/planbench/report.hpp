#pragma once

#include <string>
#include <vector>

#include "planbench/experiment.hpp"
#include "planbench/metrics.hpp"

namespace planbench {

// One table row: a scenario (agent x planner variant) with its aggregated
// metrics.
struct ReportRow {
  std::string agent;
  std::string variant;
  ScenarioStats stats;
};

// One environment's table.  Agents keep their first-appearance order from
// the records; variants sort into the canonical report order
// CL-F, CL-H, CL-H-NWS, CL-S, CL-S-NWS, OL (unknown labels last,
// alphabetically).
struct EnvReport {
  std::string env;
  std::vector<ReportRow> rows;
};

std::vector<TrialRecord> load_records(const std::string& results_path);

// Aggregates records into per-environment tables via the metrics module
// (the report layer never recomputes rates itself).
std::vector<EnvReport> build_reports(const std::vector<TrialRecord>& records);

// CSV with columns
//   Model/Agent,Planner Type,GAR,TCR,CFP,PCR,NCR,# of Valid Trials
// rates as %.3f, PCR/NCR as "–" when there were no opportunities.
std::string render_csv(const EnvReport& report);

// Pairwise two-proportion z-tests between planner variants of the same
// agent, one row per (metric, pair).  Columns:
//   Metric,Model/Agent,A,B,pA,nA,pB,nB,z,p_value,significant
// Metrics without a defined proportion on either side are skipped.
std::string render_ztests_csv(const EnvReport& report);

// Reads <results_dir>/results.jsonl and writes report_<env>.csv and
// ztests_<env>.csv per environment into out_dir (results_dir when out_dir
// is empty).  Throws Error(empty_scenario) when there are no records.
void generate_report(const std::string& results_dir,
                     const std::string& out_dir);

}  // namespace planbench
