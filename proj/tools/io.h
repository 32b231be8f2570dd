#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "outsync/closedloop.h"
#include "outsync/datagen.h"
#include "outsync/plant.h"
#include "outsync/synthesis.h"

namespace outsync::io {

/// Malformed input file (exit code 2 at the CLI).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using nlohmann::json;

json MatrixToJson(const MatrixXd& m);
/// Row-major nested array of finite numbers with equal, nonzero row lengths.
MatrixXd MatrixFromJson(const json& j, const std::string& what);

/// Scenario together with structural problems found while reading it that
/// the typed model cannot represent (e.g. E/F given for a follower).
struct ParsedScenario {
  Scenario scenario;
  std::vector<Violation> problems;
};

ParsedScenario ScenarioFromJson(const json& j);
json ScenarioToJson(const Scenario& s);

struct DataFile {
  std::uint64_t seed = 0;
  int horizon = 0;
  std::vector<DataRecord> records;
};

DataFile DataFromJson(const json& j);
json DataToJson(const DataFile& d);

ControllerSet ControllersFromJson(const json& j);
json ControllersToJson(const ControllerSet& c);

json ReadJsonFile(const std::filesystem::path& path);
std::string ReadTextFile(const std::filesystem::path& path);

/// Writes to a temporary sibling file, then renames it over `path`.
void WriteFileAtomic(const std::filesystem::path& path, const std::string& text);

/// Trajectory CSV: header `t`, then for each agent i (1-based) the columns
/// e<i>_<k> for every output component, delta<i>_inf and eps<i>_inf.
std::string TrajectoryToCsv(const Trajectory& tr);

struct TrajectoryTable {
  std::vector<int> t;
  /// Per agent: per-step infinity norm of e, and the delta/eps norms.
  std::vector<NormSeries> agents;
};

TrajectoryTable TrajectoryFromCsv(const std::string& text);

}  // namespace outsync::io
