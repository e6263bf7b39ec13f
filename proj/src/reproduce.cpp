#include <filesystem>
#include <iostream>
#include <map>

#include "nvdephase/run.hpp"

namespace nvd {

namespace {

// target -> bundled scenario files under <data_dir>/scenarios
const std::map<std::string, std::vector<std::string>>& target_table() {
  static const std::map<std::string, std::vector<std::string>> table{
      {"fig1d", {"p1_n14_aligned.json", "p1_n14_tilted.json", "p1_n15.json"}},
      {"fig4a", {"fig4a_drive.json"}},
      {"fig4c", {"fig4c_odr.json"}},
      {"fig-s9", {"fom.json"}},
      {"table-s3", {"table_s3.json"}},
      {"table-s4", {"table_s4.json"}},
      {"table-s5", {"table_s5.json"}},
  };
  return table;
}

}  // namespace

std::vector<std::string> reproduce_targets() {
  std::vector<std::string> out;
  for (const auto& [k, v] : target_table()) out.push_back(k);
  out.push_back("all");
  return out;
}

std::string default_data_dir() { return NVD_DATA_DIR; }

int reproduce_command(const std::string& target, const std::string& data_dir, const RunOptions& options,
                      std::ostream& out, std::ostream& err) {
  std::vector<std::string> files;
  if (target == "all") {
    for (const auto& [k, v] : target_table()) files.insert(files.end(), v.begin(), v.end());
  } else {
    const auto it = target_table().find(target);
    if (it == target_table().end()) {
      err << "error: unknown target '" << target << "'\n";
      return kExitInputError;
    }
    files = it->second;
  }
  int code = kExitOk;
  for (const auto& f : files) {
    const std::string path = (std::filesystem::path(data_dir) / "scenarios" / f).string();
    ScenarioReport report;
    const Scenario sc = load_scenario(path, report);
    if (!report.ok()) {
      for (const auto& v : report.violations) err << "error: " << path << ": " << v << "\n";
      return kExitInputError;
    }
    RunOptions run = options;
    if (!run.out_dir.empty()) run.out_dir = (std::filesystem::path(options.out_dir) / sc.name).string();
    TaskResult result;
    try {
      result = execute_task(sc, run);
      write_outputs(sc, sc.task(), run, result);
    } catch (const std::exception& e) {
      err << "error: " << path << ": " << e.what() << "\n";
      return kExitInputError;
    }
    for (const auto& w : result.warnings) err << "warning: " << sc.name << ": " << w << "\n";
    out << "== " << sc.name << "\n";
    for (const auto& o : evaluate_checks(sc.checks, result.metrics)) {
      out << o.line << "\n";
      if (!o.pass) code = kExitToleranceFailure;
    }
  }
  return code;
}

}  // namespace nvd
