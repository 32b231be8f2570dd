#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "outsync/matops.h"
#include "outsync/synthesis.h"

namespace outsync::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitInput = 2;

struct RunConfig {
  std::uint64_t seed = 42;
  /// 0 selects DefaultHorizon for the scenario.
  int horizon = 0;
  int steps = 2000;
  int tail_window = 100;
  double input_scale = 1.0;
  double state_scale = 1.0;
  bool zero_init = false;
  double threshold = 1e-6;
  SynthesisMode mode = SynthesisMode::kData;
  Tolerances tolerances;
  std::optional<std::filesystem::path> out;

  /// Throws std::invalid_argument on non-positive counts.
  void Validate() const;
};

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

int CmdValidate(const std::filesystem::path& scenario, const RunConfig& cfg,
                Streams io);
int CmdCollect(const std::filesystem::path& scenario, const RunConfig& cfg,
               Streams io);
int CmdCheck(const std::filesystem::path& scenario,
             const std::filesystem::path& data, const RunConfig& cfg, Streams io);
/// `data` may be empty in model mode.
int CmdSynthesize(const std::filesystem::path& scenario,
                  const std::filesystem::path& data, const RunConfig& cfg,
                  Streams io);
int CmdSimulate(const std::filesystem::path& scenario,
                const std::filesystem::path& controllers, const RunConfig& cfg,
                Streams io);
int CmdReport(const std::filesystem::path& trajectory, const RunConfig& cfg,
              Streams io);

}  // namespace outsync::cli
