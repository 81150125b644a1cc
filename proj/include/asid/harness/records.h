#ifndef ASID_HARNESS_RECORDS_H_
#define ASID_HARNESS_RECORDS_H_

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"

#include "asid/control.h"
#include "asid/envlab.h"
#include "asid/policy.h"
#include "asid/sysid.h"

namespace asid::harness {

// Versioned on-disk records. Readers reject other formats and versions.
inline constexpr int kRecordVersion = 1;

nlohmann::json ToJson(const Policy& policy);
Policy PolicyFromJson(const nlohmann::json& j);

nlohmann::json ToJson(const Trajectory& traj);
Trajectory TrajectoryFromJson(const nlohmann::json& j);

nlohmann::json ToJson(const EnvSpec& spec);
nlohmann::json ToJson(const ParamVector& theta);
nlohmann::json ToJson(const IdentificationResult& id);
// Names and bounds come from the record; checked against env.
IdentificationResult IdentificationFromJson(const nlohmann::json& j,
                                            const Environment& env);
nlohmann::json ToJson(const TaskReport& report);

// Shortest round-trip decimal form; the same text in every output file.
std::string FormatNumber(double x);

void WriteJsonFile(const std::filesystem::path& path,
                   const nlohmann::json& j);
nlohmann::json ReadJsonFile(const std::filesystem::path& path);

// Line-delimited record file fed by concurrent jobs. Job k's lines are
// written only after jobs 0..k-1, so the file is independent of scheduling.
class OrderedSink {
 public:
  // Appends to path (creating it) and expects jobs 0..n_jobs-1.
  OrderedSink(const std::filesystem::path& path, std::size_t n_jobs);

  void Submit(std::size_t job, std::vector<std::string> lines);
  std::size_t written() const;

 private:
  void FlushReady();

  mutable std::mutex mu_;
  std::ofstream out_;
  std::size_t next_ = 0;
  std::size_t n_jobs_;
  std::map<std::size_t, std::vector<std::string>> pending_;
};

}  // namespace asid::harness

#endif  // ASID_HARNESS_RECORDS_H_
