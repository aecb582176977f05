#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ugmae/datasets.hpp"
#include "ugmae/error.hpp"
#include "ugmae/eval.hpp"
#include "ugmae/trainer.hpp"

namespace ugmae {

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitRuntime = 3 };

/// 2 for configuration and input errors, 3 for everything raised at run time.
int exit_code_for(ErrorKind kind);

struct RunManifest {
  std::string command;
  std::string config_path;  // empty when defaults were used
  std::string output_dir;
  std::string started_at;   // ISO-8601 UTC
  std::string finished_at;
  std::string config_digest;
  std::string dataset;
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const RunManifest& manifest);
std::string utc_timestamp();

/// Output directory written through a hidden sibling staging directory and
/// renamed into place by commit(). An existing target is refused unless
/// `force`; with force it is replaced only at commit time.
class StagedOutput {
 public:
  StagedOutput(std::filesystem::path target, bool force);
  ~StagedOutput();
  StagedOutput(const StagedOutput&) = delete;
  StagedOutput& operator=(const StagedOutput&) = delete;

  const std::filesystem::path& path() const { return staging_; }
  const std::filesystem::path& target() const { return target_; }
  void commit();

 private:
  std::filesystem::path target_;
  std::filesystem::path staging_;
  bool committed_ = false;
};

/// Header plus one row per epoch, values at full precision.
std::string metrics_csv_header();
std::string metrics_csv_row(int epoch, const LossReport& r);

/// Ablation switches: AM -> uniform masking, SR/BS/CA -> zero weight.
TrainConfig ablated(TrainConfig cfg, const std::string& component);
std::vector<std::string> parse_components(const std::string& list);

/// Grids searched for the two mask rates.
std::vector<double> default_grid(const std::string& param);

/// Pretrains, writes checkpoint.bin and metrics.csv into dir (when given)
/// and returns the mean test accuracy of the linear probe.
double pretrain_and_probe(const Dataset& dataset, const TrainConfig& cfg, const std::optional<std::filesystem::path>& dir,
                          const ProbeConfig& probe = {});

/// Probe split of a dataset: its own split, or up to 20 labelled nodes per
/// class (at most half of the smallest class) with the rest as test.
Split probe_split(const Dataset& dataset);

/// Command-line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ugmae
