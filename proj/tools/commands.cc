#include "commands.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "io.h"
#include "outsync/closedloop.h"
#include "outsync/datagen.h"
#include "outsync/errors.h"
#include "outsync/informativity.h"

namespace outsync::cli {

void RunConfig::Validate() const {
  if (horizon < 0) throw std::invalid_argument("--horizon must be positive");
  if (steps < 1) throw std::invalid_argument("--steps must be positive");
  if (tail_window < 1) throw std::invalid_argument("--tail-window must be positive");
  if (!(threshold > 0.0)) throw std::invalid_argument("--threshold must be positive");
  if (!(input_scale >= 0.0) || !(state_scale >= 0.0)) {
    throw std::invalid_argument("excitation scales must be non-negative");
  }
  tolerances.Validate();
}

namespace {

/// Input problem detected by a command; mapped to exit code 2.
struct InputFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void PrintViolations(const std::vector<Violation>& v, std::ostream& os) {
  for (const auto& x : v) os << "  [" << x.code << "] " << x.message << '\n';
}

/// Reads and validates a scenario. Returns nullopt (after printing the
/// violations) if it is not usable.
std::optional<Scenario> LoadValidScenario(const std::filesystem::path& path,
                                          const RunConfig& cfg, Streams io) {
  io::ParsedScenario parsed = io::ScenarioFromJson(io::ReadJsonFile(path));
  std::vector<Violation> v = parsed.problems;
  if (v.empty()) {
    auto more = ValidateScenario(parsed.scenario, cfg.tolerances);
    v.insert(v.end(), more.begin(), more.end());
  }
  if (!v.empty()) {
    io.err << "scenario " << path.string() << " is invalid:\n";
    PrintViolations(v, io.err);
    return std::nullopt;
  }
  return std::move(parsed.scenario);
}

/// Data records must line up with the scenario's agents and dimensions.
void CheckDataAgainstScenario(const Scenario& s, const io::DataFile& d) {
  if (static_cast<int>(d.records.size()) != s.n_agents()) {
    throw InputFailure("data file has " + std::to_string(d.records.size()) +
                       " records for " + std::to_string(s.n_agents()) + " agents");
  }
  for (const auto& r : d.records) {
    if (r.agent_index < 0 || r.agent_index >= s.n_agents()) {
      throw InputFailure("data record for unknown agent " +
                         std::to_string(r.agent_index + 1));
    }
    const AgentModel& a = s.agents[r.agent_index];
    const std::string who = "agent " + std::to_string(r.agent_index + 1);
    if (r.role != a.role()) throw InputFailure(who + ": role differs from scenario");
    if (r.state_dim() != a.state_dim() || r.input_dim() != a.input_dim() ||
        r.output_dim() != a.output_dim() || r.y0p.rows() != s.exo.output_dim()) {
      throw InputFailure(who + ": data dimensions differ from scenario");
    }
  }
}

void CheckControllersAgainstScenario(const Scenario& s, const ControllerSet& c) {
  if (static_cast<int>(c.agents.size()) != s.n_agents()) {
    throw InputFailure("controllers file does not match the number of agents");
  }
  const int n0 = s.exo.state_dim();
  const int p = s.exo.output_dim();
  if (c.observer_l.rows() != n0 || c.observer_l.cols() != p ||
      c.observer_h.rows() != n0 || c.observer_h.cols() != p) {
    throw InputFailure("observer gains have the wrong shape");
  }
  for (int i = 0; i < s.n_agents(); ++i) {
    const AgentModel& a = s.agents[i];
    const AgentController& k = c.agents[i];
    if (k.k.rows() != a.input_dim() || k.k.cols() != a.state_dim() ||
        k.pi.rows() != a.state_dim() || k.pi.cols() != n0 ||
        k.gamma.rows() != a.input_dim() || k.gamma.cols() != n0) {
      throw InputFailure("controller of agent " + std::to_string(i + 1) +
                         " has the wrong shape");
    }
  }
}

std::string AgentLabel(const DesignError& e) {
  return e.agent() ? "agent " + std::to_string(*e.agent() + 1) : "network";
}

void WriteOrPrint(const RunConfig& cfg, const std::string& text, std::ostream& out) {
  if (cfg.out) {
    io::WriteFileAtomic(*cfg.out, text);
  } else {
    out << text;
  }
}

template <typename Body>
int Guard(Streams io, Body&& body) {
  try {
    return body();
  } catch (const io::ParseError& e) {
    io.err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const InputFailure& e) {
    io.err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const DimensionError& e) {
    io.err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const nlohmann::json::exception& e) {
    io.err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    io.err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const DesignError& e) {
    io.err << "failed: " << AgentLabel(e);
    if (!e.condition().empty()) io.err << ", condition " << e.condition();
    io.err << " (" << ToString(e.kind()) << "): " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

}  // namespace

int CmdValidate(const std::filesystem::path& scenario, const RunConfig& cfg,
                Streams io) {
  return Guard(io, [&] {
    cfg.Validate();
    io::ParsedScenario parsed = io::ScenarioFromJson(io::ReadJsonFile(scenario));
    std::vector<Violation> v = parsed.problems;
    auto more = ValidateScenario(parsed.scenario, cfg.tolerances);
    v.insert(v.end(), more.begin(), more.end());
    auto verdict = [&](const std::string& code, const char* title) {
      bool ok = true;
      for (const auto& x : v) ok = ok && x.code != code;
      io.out << std::left << std::setw(12) << code << (ok ? "PASS" : "FAIL") << "  "
             << title << '\n';
    };
    verdict("structure", "roles, shapes and graph consistency");
    verdict("assumption1", "exosystem eigenvalues simple and on the unit circle");
    verdict("assumption2", "(R, S) observable");
    verdict("assumption3", "every agent reachable from the exosystem");
    if (!v.empty()) {
      io.out << "violations:\n";
      PrintViolations(v, io.out);
      return kExitDomain;
    }
    return kExitOk;
  });
}

int CmdCollect(const std::filesystem::path& scenario, const RunConfig& cfg,
               Streams io) {
  return Guard(io, [&] {
    cfg.Validate();
    auto s = LoadValidScenario(scenario, cfg, io);
    if (!s) return kExitDomain;
    ExcitationConfig ex;
    ex.seed = cfg.seed;
    ex.horizon = cfg.horizon > 0 ? cfg.horizon : DefaultHorizon(*s);
    ex.input_scale = cfg.input_scale;
    ex.state_scale = cfg.state_scale;
    io::DataFile d{cfg.seed, ex.horizon, Collect(*s, ex)};
    WriteOrPrint(cfg, io::DataToJson(d).dump(1) + "\n", io.out);
    if (cfg.out) {
      io.err << "collected " << d.records.size() << " records, seed " << d.seed
             << ", horizon " << d.horizon << " -> " << cfg.out->string() << '\n';
    }
    return kExitOk;
  });
}

int CmdCheck(const std::filesystem::path& scenario,
             const std::filesystem::path& data, const RunConfig& cfg, Streams io) {
  return Guard(io, [&] {
    cfg.Validate();
    auto s = LoadValidScenario(scenario, cfg, io);
    if (!s) return kExitDomain;
    io::DataFile d = io::DataFromJson(io::ReadJsonFile(data));
    CheckDataAgainstScenario(*s, d);

    std::vector<InformativityReport> reports;
    for (const auto& r : d.records) {
      reports.push_back(AssessInformativity(r, s->exo, cfg.tolerances));
    }
    std::sort(reports.begin(), reports.end(),
              [](const auto& a, const auto& b) { return a.agent_index < b.agent_index; });
    auto cell = [](const char* label, bool ok) {
      std::ostringstream c;
      c << label << ':' << (ok ? "PASS" : "FAIL");
      return c.str();
    };
    io.out << "agent  role      rank       stabil.    regulator  residual\n";
    std::vector<std::string> failures;
    for (const auto& rep : reports) {
      io.out << std::left << std::setw(7) << rep.agent_index + 1 << std::setw(10)
             << ToString(rep.role) << std::setw(11) << cell(rep.rank_label(), rep.rank_ok)
             << std::setw(11) << cell(rep.stab_label(), rep.stab_ok) << std::setw(11)
             << cell(rep.regulator_label(), rep.regulator_ok) << std::setprecision(3)
             << std::scientific << rep.residual << std::defaultfloat << '\n';
      const std::string who = "agent " + std::to_string(rep.agent_index + 1);
      if (!rep.rank_ok) failures.push_back(who + " fails " + rep.rank_label());
      if (!rep.stab_ok) failures.push_back(who + " fails " + rep.stab_label());
      if (!rep.regulator_ok) failures.push_back(who + " fails " + rep.regulator_label());
    }
    for (const auto& f : failures) io.out << f << '\n';
    return failures.empty() ? kExitOk : kExitDomain;
  });
}

int CmdSynthesize(const std::filesystem::path& scenario,
                  const std::filesystem::path& data, const RunConfig& cfg,
                  Streams io) {
  return Guard(io, [&] {
    cfg.Validate();
    auto s = LoadValidScenario(scenario, cfg, io);
    if (!s) return kExitDomain;
    std::vector<DataRecord> records;
    if (cfg.mode == SynthesisMode::kData) {
      if (data.empty()) throw InputFailure("data mode requires --data");
      io::DataFile d = io::DataFromJson(io::ReadJsonFile(data));
      CheckDataAgainstScenario(*s, d);
      records = std::move(d.records);
    }
    const ControllerSet c = Synthesize(*s, records, cfg.mode, cfg.tolerances);
    WriteOrPrint(cfg, io::ControllersToJson(c).dump(1) + "\n", io.out);
    io.err << "synthesized " << ToString(c.mode) << "-mode controllers; rho(S+LR) = "
           << c.observer_l_radius;
    if (c.observer_h_radius) io.err << ", worst follower observer radius = " << *c.observer_h_radius;
    io.err << '\n';
    return kExitOk;
  });
}

int CmdSimulate(const std::filesystem::path& scenario,
                const std::filesystem::path& controllers, const RunConfig& cfg,
                Streams io) {
  return Guard(io, [&] {
    cfg.Validate();
    auto s = LoadValidScenario(scenario, cfg, io);
    if (!s) return kExitInput;
    const ControllerSet c = io::ControllersFromJson(io::ReadJsonFile(controllers));
    CheckControllersAgainstScenario(*s, c);
    const SimState init = cfg.zero_init ? SimState::Zero(*s) : RandomInitialState(*s, cfg.seed);
    const Trajectory tr = Run(*s, c, init, cfg.steps);
    WriteOrPrint(cfg, io::TrajectoryToCsv(tr), io.out);
    return kExitOk;
  });
}

int CmdReport(const std::filesystem::path& trajectory, const RunConfig& cfg,
              Streams io) {
  return Guard(io, [&] {
    cfg.Validate();
    const io::TrajectoryTable table = io::TrajectoryFromCsv(io::ReadTextFile(trajectory));
    if (table.t.empty()) throw io::ParseError("trajectory CSV has no rows");
    const int window = std::min<int>(cfg.tail_window, static_cast<int>(table.t.size()));
    const ConvergenceMetrics m = ComputeMetrics(table.agents, window);
    io.out << "tail window: " << window << " steps, threshold " << cfg.threshold << '\n';
    io.out << "agent  e_tail        e_decay   delta_tail    delta_decay  eps_tail      eps_decay\n";
    bool ok = true;
    for (size_t i = 0; i < m.agents.size(); ++i) {
      const AgentMetrics& a = m.agents[i];
      const bool agent_ok = a.e.tail_max <= cfg.threshold;
      ok = ok && agent_ok;
      io.out << std::left << std::setw(7) << i + 1 << std::scientific
             << std::setprecision(4) << std::setw(14) << a.e.tail_max << std::fixed
             << std::setw(10) << a.e.decay << std::scientific << std::setw(14)
             << a.delta.tail_max << std::fixed << std::setw(13) << a.delta.decay
             << std::scientific << std::setw(14) << a.eps.tail_max << std::fixed
             << std::setw(10) << a.eps.decay << std::defaultfloat
             << (agent_ok ? "" : "  above threshold") << '\n';
    }
    io.out << (ok ? "synchronized" : "not synchronized") << '\n';
    return ok ? kExitOk : kExitDomain;
  });
}

}  // namespace outsync::cli
