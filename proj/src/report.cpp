#include "planbench/report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "planbench/util.hpp"

namespace planbench {

namespace {

// En dash, the published tables' marker for "no opportunities".
constexpr const char kAbsent[] = "–";

std::string fixed3(double value) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3f", value);
  return buf;
}

std::string rate_or_absent(const std::optional<double>& value) {
  return value.has_value() ? fixed3(*value) : std::string(kAbsent);
}

int variant_rank(const std::string& label) {
  static const std::map<std::string, int> kOrder = {
      {"CL-F", 0}, {"CL-H", 1}, {"CL-H-NWS", 2},
      {"CL-S", 3}, {"CL-S-NWS", 4}, {"OL", 5},
  };
  const auto it = kOrder.find(label);
  return it != kOrder.end() ? it->second : static_cast<int>(kOrder.size());
}

// A metric viewed as (proportion, sample size): the z-test inputs.  GAR and
// TCR are over valid trials, CFP over all trials, PCR/NCR over pooled
// opportunities; absent when the denominator is zero.
struct Proportion {
  double p = 0.0;
  int n = 0;
};

std::optional<Proportion> metric_proportion(const ScenarioStats& stats,
                                            const std::string& metric) {
  if (metric == "GAR" || metric == "TCR") {
    if (stats.n_valid < 1) return std::nullopt;
    return Proportion{metric == "GAR" ? stats.gar : stats.tcr, stats.n_valid};
  }
  if (metric == "CFP") {
    if (stats.n_trials < 1) return std::nullopt;
    return Proportion{stats.cfp, stats.n_trials};
  }
  if (metric == "PCR") {
    if (!stats.pcr.has_value()) return std::nullopt;
    return Proportion{*stats.pcr, stats.pos_opportunities};
  }
  if (!stats.ncr.has_value()) return std::nullopt;
  return Proportion{*stats.ncr, stats.neg_opportunities};
}

}  // namespace

std::vector<TrialRecord> load_records(const std::string& results_path) {
  std::ifstream in(results_path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::io_error,
                "cannot read results '" + results_path + "'");
  }
  std::vector<TrialRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(trial_record_from_json_line(line));
    } catch (const Error& err) {
      throw Error(err.code(), results_path + ":" + std::to_string(line_no) +
                                  ": " + err.what());
    }
  }
  return records;
}

std::vector<EnvReport> build_reports(const std::vector<TrialRecord>& records) {
  if (records.empty()) {
    throw Error(ErrorCode::empty_scenario, "no trial records to report on");
  }

  // First-appearance order for environments and agents.
  std::vector<std::string> envs;
  std::vector<std::string> agents;
  for (const TrialRecord& record : records) {
    if (std::find(envs.begin(), envs.end(), record.env) == envs.end()) {
      envs.push_back(record.env);
    }
    if (std::find(agents.begin(), agents.end(), record.agent) ==
        agents.end()) {
      agents.push_back(record.agent);
    }
  }

  std::vector<EnvReport> reports;
  for (const std::string& env : envs) {
    EnvReport report;
    report.env = env;
    for (const std::string& agent : agents) {
      std::vector<std::string> variants;
      for (const TrialRecord& record : records) {
        if (record.env != env || record.agent != agent) continue;
        if (std::find(variants.begin(), variants.end(), record.variant) ==
            variants.end()) {
          variants.push_back(record.variant);
        }
      }
      std::stable_sort(variants.begin(), variants.end(),
                       [](const std::string& a, const std::string& b) {
                         const int ra = variant_rank(a);
                         const int rb = variant_rank(b);
                         return ra != rb ? ra < rb : a < b;
                       });
      for (const std::string& variant : variants) {
        std::vector<TrialMetrics> metrics;
        for (const TrialRecord& record : records) {
          if (record.env == env && record.agent == agent &&
              record.variant == variant) {
            metrics.push_back(record.metrics);
          }
        }
        report.rows.push_back({agent, variant, aggregate(metrics)});
      }
    }
    if (!report.rows.empty()) reports.push_back(std::move(report));
  }
  return reports;
}

std::string render_csv(const EnvReport& report) {
  std::ostringstream out;
  out << "Model/Agent,Planner Type,GAR,TCR,CFP,PCR,NCR,# of Valid Trials\n";
  for (const ReportRow& row : report.rows) {
    out << row.agent << "," << row.variant << "," << fixed3(row.stats.gar)
        << "," << fixed3(row.stats.tcr) << "," << fixed3(row.stats.cfp)
        << "," << rate_or_absent(row.stats.pcr) << ","
        << rate_or_absent(row.stats.ncr) << "," << row.stats.n_valid << "\n";
  }
  return out.str();
}

std::string render_ztests_csv(const EnvReport& report) {
  std::ostringstream out;
  out << "Metric,Model/Agent,A,B,pA,nA,pB,nB,z,p_value,significant\n";
  for (const char* metric : {"GAR", "TCR", "CFP", "PCR", "NCR"}) {
    // Compare planner variants pairwise within each agent.
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
      for (std::size_t j = i + 1; j < report.rows.size(); ++j) {
        const ReportRow& a = report.rows[i];
        const ReportRow& b = report.rows[j];
        if (a.agent != b.agent) continue;
        const auto pa = metric_proportion(a.stats, metric);
        const auto pb = metric_proportion(b.stats, metric);
        if (!pa.has_value() || !pb.has_value()) continue;
        const ZTestResult z = two_prop_z(pa->p, pa->n, pb->p, pb->n);
        out << metric << "," << a.agent << "," << a.variant << ","
            << b.variant << "," << fixed3(pa->p) << "," << pa->n << ","
            << fixed3(pb->p) << "," << pb->n << "," << fixed3(z.z) << ","
            << fixed3(z.p_value) << "," << (z.significant ? "yes" : "no")
            << "\n";
      }
    }
  }
  return out.str();
}

void generate_report(const std::string& results_dir,
                     const std::string& out_dir) {
  const std::filesystem::path results_path =
      std::filesystem::path(results_dir) / "results.jsonl";
  const std::vector<TrialRecord> records = load_records(results_path.string());
  const std::vector<EnvReport> reports = build_reports(records);

  const std::filesystem::path out_base(out_dir.empty() ? results_dir
                                                       : out_dir);
  std::filesystem::create_directories(out_base);
  for (const EnvReport& report : reports) {
    const auto write = [&](const std::string& name,
                           const std::string& content) {
      const std::filesystem::path path = out_base / name;
      std::ofstream file(path, std::ios::binary | std::ios::trunc);
      if (!file) {
        throw Error(ErrorCode::io_error,
                    "cannot write '" + path.string() + "'");
      }
      file << content;
    };
    write("report_" + report.env + ".csv", render_csv(report));
    write("ztests_" + report.env + ".csv", render_ztests_csv(report));
  }
}

}  // namespace planbench
