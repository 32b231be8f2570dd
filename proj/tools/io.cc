#include "io.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

namespace outsync::io {

json MatrixToJson(const MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixXd MatrixFromJson(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) {
    throw ParseError(what + ": expected a non-empty array of rows");
  }
  const size_t cols = j.front().is_array() ? j.front().size() : 0;
  if (cols == 0) throw ParseError(what + ": rows must be non-empty arrays");
  MatrixXd m(j.size(), cols);
  for (size_t i = 0; i < j.size(); ++i) {
    const json& row = j[i];
    if (!row.is_array() || row.size() != cols) {
      throw ParseError(what + ": row " + std::to_string(i) +
                       " has a different length");
    }
    for (size_t k = 0; k < cols; ++k) {
      if (!row[k].is_number()) {
        throw ParseError(what + ": non-numeric entry");
      }
      const double v = row[k].get<double>();
      if (!std::isfinite(v)) throw ParseError(what + ": non-finite entry");
      m(i, k) = v;
    }
  }
  return m;
}

namespace {

const json& Field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw ParseError(where + ": missing field \"" + key + "\"");
  }
  return j.at(key);
}

AgentRole RoleFromJson(const json& j, const std::string& where) {
  if (!j.is_string()) throw ParseError(where + ": role must be a string");
  const std::string role = j.get<std::string>();
  if (role == "leader") return AgentRole::kLeader;
  if (role == "follower") return AgentRole::kFollower;
  throw ParseError(where + ": role must be \"leader\" or \"follower\"");
}

template <typename T>
T Number(const json& j, const std::string& what) {
  if (!j.is_number()) throw ParseError(what + ": expected a number");
  return j.get<T>();
}

std::optional<double> OptionalNumber(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return Number<double>(j.at(key), key);
}

}  // namespace

ParsedScenario ScenarioFromJson(const json& j) {
  ParsedScenario out;
  Scenario& s = out.scenario;
  const json& exo = Field(j, "exosystem", "scenario");
  s.exo.s = MatrixFromJson(Field(exo, "S", "exosystem"), "exosystem.S");
  s.exo.r = MatrixFromJson(Field(exo, "R", "exosystem"), "exosystem.R");

  const json& agents = Field(j, "agents", "scenario");
  if (!agents.is_array() || agents.empty()) {
    throw ParseError("scenario: agents must be a non-empty array");
  }
  for (size_t i = 0; i < agents.size(); ++i) {
    const std::string where = "agents[" + std::to_string(i) + "]";
    const json& a = agents[i];
    const AgentRole role = RoleFromJson(Field(a, "role", where), where);
    MatrixXd am = MatrixFromJson(Field(a, "A", where), where + ".A");
    MatrixXd bm = MatrixFromJson(Field(a, "B", where), where + ".B");
    MatrixXd cm = MatrixFromJson(Field(a, "C", where), where + ".C");
    MatrixXd dm = MatrixFromJson(Field(a, "D", where), where + ".D");
    const bool has_e = a.contains("E");
    const bool has_f = a.contains("F");
    if (role == AgentRole::kLeader) {
      MatrixXd em = has_e ? MatrixFromJson(a.at("E"), where + ".E") : MatrixXd();
      MatrixXd fm = has_f ? MatrixFromJson(a.at("F"), where + ".F") : MatrixXd();
      if (!has_e || !has_f) {
        out.problems.push_back({"structure", "agent " + std::to_string(i + 1) +
                                                 ": leader requires E and F"});
      }
      s.agents.push_back(AgentModel::Leader(std::move(am), std::move(bm),
                                            std::move(cm), std::move(dm),
                                            std::move(em), std::move(fm)));
    } else {
      if (has_e || has_f) {
        out.problems.push_back(
            {"structure", "agent " + std::to_string(i + 1) +
                              ": followers are not driven by the exosystem and "
                              "must not specify E or F"});
      }
      s.agents.push_back(AgentModel::Follower(std::move(am), std::move(bm),
                                              std::move(cm), std::move(dm)));
    }
  }

  const json& graph = Field(j, "graph", "scenario");
  const json& nl = Field(graph, "n_leaders", "graph");
  if (!nl.is_number_integer()) throw ParseError("graph.n_leaders must be an integer");
  s.graph.n_leaders = nl.get<int>();
  s.graph.adjacency = MatrixFromJson(Field(graph, "adjacency", "graph"),
                                     "graph.adjacency");
  return out;
}

json ScenarioToJson(const Scenario& s) {
  json agents = json::array();
  for (const auto& a : s.agents) {
    json aj = {{"role", ToString(a.role())},
               {"A", MatrixToJson(a.a())},
               {"B", MatrixToJson(a.b())},
               {"C", MatrixToJson(a.c())},
               {"D", MatrixToJson(a.d())}};
    if (a.is_leader()) {
      aj["E"] = MatrixToJson(*a.e());
      aj["F"] = MatrixToJson(*a.f());
    }
    agents.push_back(std::move(aj));
  }
  return {{"exosystem", {{"S", MatrixToJson(s.exo.s)}, {"R", MatrixToJson(s.exo.r)}}},
          {"agents", std::move(agents)},
          {"graph",
           {{"n_leaders", s.graph.n_leaders},
            {"adjacency", MatrixToJson(s.graph.adjacency)}}}};
}

DataFile DataFromJson(const json& j) {
  DataFile d;
  d.seed = Number<std::uint64_t>(Field(j, "seed", "data"), "seed");
  d.horizon = Number<int>(Field(j, "horizon", "data"), "horizon");
  const json& recs = Field(j, "records", "data");
  if (!recs.is_array()) throw ParseError("data: records must be an array");
  for (size_t i = 0; i < recs.size(); ++i) {
    const std::string where = "records[" + std::to_string(i) + "]";
    const json& rj = recs[i];
    DataRecord r;
    r.agent_index = Number<int>(Field(rj, "agent", where), where + ".agent") - 1;
    r.role = RoleFromJson(Field(rj, "role", where), where);
    r.horizon = d.horizon;
    r.y0p = MatrixFromJson(Field(rj, "Y0p", where), where + ".Y0p");
    r.up = MatrixFromJson(Field(rj, "Up", where), where + ".Up");
    r.xp = MatrixFromJson(Field(rj, "Xp", where), where + ".Xp");
    r.xf = MatrixFromJson(Field(rj, "Xf", where), where + ".Xf");
    r.yp = MatrixFromJson(Field(rj, "Yp", where), where + ".Yp");
    try {
      r.CheckShapes();
    } catch (const std::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
    d.records.push_back(std::move(r));
  }
  return d;
}

json DataToJson(const DataFile& d) {
  json recs = json::array();
  for (const auto& r : d.records) {
    recs.push_back({{"agent", r.agent_index + 1},
                    {"role", ToString(r.role)},
                    {"Y0p", MatrixToJson(r.y0p)},
                    {"Up", MatrixToJson(r.up)},
                    {"Xp", MatrixToJson(r.xp)},
                    {"Xf", MatrixToJson(r.xf)},
                    {"Yp", MatrixToJson(r.yp)}});
  }
  return {{"seed", d.seed}, {"horizon", d.horizon}, {"records", std::move(recs)}};
}

namespace {

json TolerancesToJson(const Tolerances& t) {
  return {{"rank_rel", t.rank_rel},
          {"schur_margin", t.schur_margin},
          {"residual_abs", t.residual_abs},
          {"riccati_tol", t.riccati_tol},
          {"riccati_max_iter", t.riccati_max_iter}};
}

Tolerances TolerancesFromJson(const json& j) {
  Tolerances t;
  t.rank_rel = Number<double>(Field(j, "rank_rel", "tolerances"), "rank_rel");
  t.schur_margin =
      Number<double>(Field(j, "schur_margin", "tolerances"), "schur_margin");
  t.residual_abs =
      Number<double>(Field(j, "residual_abs", "tolerances"), "residual_abs");
  t.riccati_tol = Number<double>(Field(j, "riccati_tol", "tolerances"), "riccati_tol");
  t.riccati_max_iter =
      Number<int>(Field(j, "riccati_max_iter", "tolerances"), "riccati_max_iter");
  return t;
}

}  // namespace

json ControllersToJson(const ControllerSet& c) {
  json agents = json::array();
  for (size_t i = 0; i < c.agents.size(); ++i) {
    const AgentController& a = c.agents[i];
    json aj = {{"agent", i + 1},
               {"K", MatrixToJson(a.k)},
               {"Pi", MatrixToJson(a.pi)},
               {"Gamma", MatrixToJson(a.gamma)},
               {"regulator_residual", a.regulator_residual},
               {"model_closed_loop_radius", a.model_closed_loop_radius},
               {"model_regulator_residual", a.model_regulator_residual}};
    if (a.m) aj["M"] = MatrixToJson(*a.m);
    aj["data_closed_loop_radius"] =
        a.data_closed_loop_radius ? json(*a.data_closed_loop_radius) : json(nullptr);
    agents.push_back(std::move(aj));
  }
  return {{"mode", ToString(c.mode)},
          {"tolerances", TolerancesToJson(c.tolerances)},
          {"observers",
           {{"L", MatrixToJson(c.observer_l)},
            {"H", MatrixToJson(c.observer_h)},
            {"S_plus_LR_radius", c.observer_l_radius},
            {"worst_S_minus_lambda_HR_radius",
             c.observer_h_radius ? json(*c.observer_h_radius) : json(nullptr)}}},
          {"agents", std::move(agents)}};
}

ControllerSet ControllersFromJson(const json& j) {
  ControllerSet c;
  const json& mode = Field(j, "mode", "controllers");
  if (mode == "data") {
    c.mode = SynthesisMode::kData;
  } else if (mode == "model") {
    c.mode = SynthesisMode::kModel;
  } else {
    throw ParseError("controllers: mode must be \"data\" or \"model\"");
  }
  c.tolerances = TolerancesFromJson(Field(j, "tolerances", "controllers"));
  const json& obs = Field(j, "observers", "controllers");
  c.observer_l = MatrixFromJson(Field(obs, "L", "observers"), "observers.L");
  c.observer_h = MatrixFromJson(Field(obs, "H", "observers"), "observers.H");
  c.observer_l_radius = Number<double>(Field(obs, "S_plus_LR_radius", "observers"),
                                       "S_plus_LR_radius");
  c.observer_h_radius = OptionalNumber(obs, "worst_S_minus_lambda_HR_radius");
  const json& agents = Field(j, "agents", "controllers");
  if (!agents.is_array()) throw ParseError("controllers: agents must be an array");
  for (size_t i = 0; i < agents.size(); ++i) {
    const std::string where = "agents[" + std::to_string(i) + "]";
    const json& aj = agents[i];
    AgentController a;
    a.k = MatrixFromJson(Field(aj, "K", where), where + ".K");
    a.pi = MatrixFromJson(Field(aj, "Pi", where), where + ".Pi");
    a.gamma = MatrixFromJson(Field(aj, "Gamma", where), where + ".Gamma");
    if (aj.contains("M")) a.m = MatrixFromJson(aj.at("M"), where + ".M");
    a.regulator_residual = Number<double>(Field(aj, "regulator_residual", where),
                                          "regulator_residual");
    a.model_closed_loop_radius =
        Number<double>(Field(aj, "model_closed_loop_radius", where),
                       "model_closed_loop_radius");
    a.model_regulator_residual =
        Number<double>(Field(aj, "model_regulator_residual", where),
                       "model_regulator_residual");
    a.data_closed_loop_radius = OptionalNumber(aj, "data_closed_loop_radius");
    c.agents.push_back(std::move(a));
  }
  return c;
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json ReadJsonFile(const std::filesystem::path& path) {
  const std::string text = ReadTextFile(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void WriteFileAtomic(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {

std::string FormatNumber(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string TrajectoryToCsv(const Trajectory& tr) {
  const Scenario& s = tr.scenario();
  const int p = s.exo.output_dim();
  std::ostringstream os;
  os << "t";
  for (int i = 1; i <= s.n_agents(); ++i) {
    for (int k = 1; k <= p; ++k) os << ",e" << i << '_' << k;
    os << ",delta" << i << "_inf,eps" << i << "_inf";
  }
  os << '\n';
  auto inf_norm = [](const VectorXd& v) {
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
  };
  for (int step = 0; step < tr.size(); ++step) {
    const StepSignals sig = tr.SignalsAt(step);
    os << tr.states()[step].t;
    for (const auto& a : sig.agents) {
      for (Eigen::Index k = 0; k < a.e.size(); ++k) os << ',' << FormatNumber(a.e(k));
      os << ',' << FormatNumber(inf_norm(a.delta)) << ','
         << FormatNumber(inf_norm(a.eps));
    }
    os << '\n';
  }
  return os.str();
}

TrajectoryTable TrajectoryFromCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("trajectory CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  {
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
  }
  if (header.empty() || header.front() != "t") {
    throw ParseError("trajectory CSV header must start with t");
  }
  enum class Kind { kE, kDelta, kEps };
  struct Column {
    int agent;
    Kind kind;
  };
  static const std::regex e_re(R"(e(\d+)_(\d+))");
  static const std::regex d_re(R"(delta(\d+)_inf)");
  static const std::regex x_re(R"(eps(\d+)_inf)");
  std::vector<Column> columns;
  int n_agents = 0;
  for (size_t c = 1; c < header.size(); ++c) {
    std::smatch m;
    Column col{};
    if (std::regex_match(header[c], m, e_re)) {
      col = {std::stoi(m[1]), Kind::kE};
    } else if (std::regex_match(header[c], m, d_re)) {
      col = {std::stoi(m[1]), Kind::kDelta};
    } else if (std::regex_match(header[c], m, x_re)) {
      col = {std::stoi(m[1]), Kind::kEps};
    } else {
      throw ParseError("unrecognized trajectory column " + header[c]);
    }
    if (col.agent < 1) throw ParseError("agent indices in CSV start at 1");
    n_agents = std::max(n_agents, col.agent);
    columns.push_back(col);
  }
  TrajectoryTable table;
  table.agents.resize(n_agents);
  int row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size()) {
      throw ParseError("trajectory CSV row " + std::to_string(row_no) +
                       " has the wrong number of cells");
    }
    std::vector<double> values(cells.size());
    for (size_t c = 0; c < cells.size(); ++c) {
      try {
        size_t used = 0;
        values[c] = std::stod(cells[c], &used);
        if (used != cells[c].size()) throw std::invalid_argument(cells[c]);
      } catch (const std::exception&) {
        throw ParseError("trajectory CSV row " + std::to_string(row_no) +
                         ": bad number '" + cells[c] + "'");
      }
    }
    table.t.push_back(static_cast<int>(values[0]));
    std::vector<double> e_norm(n_agents, 0.0);
    for (size_t c = 1; c < cells.size(); ++c) {
      const Column& col = columns[c - 1];
      NormSeries& series = table.agents[col.agent - 1];
      switch (col.kind) {
        case Kind::kE:
          e_norm[col.agent - 1] = std::max(e_norm[col.agent - 1], std::abs(values[c]));
          break;
        case Kind::kDelta:
          series.delta.push_back(values[c]);
          break;
        case Kind::kEps:
          series.eps.push_back(values[c]);
          break;
      }
    }
    for (int i = 0; i < n_agents; ++i) table.agents[i].e.push_back(e_norm[i]);
  }
  for (const auto& a : table.agents) {
    if (a.delta.size() != table.t.size() || a.eps.size() != table.t.size()) {
      throw ParseError("trajectory CSV is missing delta/eps columns for an agent");
    }
  }
  return table;
}

}  // namespace outsync::io
