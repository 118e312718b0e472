#pragma once

#include "netlasso/trip_data.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace netlasso::cli {

/// Bad user input. `field()` is the flag name, e.g. "--k".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct SynthLassoConfig {
  std::filesystem::path out = "out";
  std::optional<std::uint64_t> seed;
  int n = 1500;
  int d = 5000;
  double density = 0.02;
  double truth_density = 0.02;
  double noise = 0.0316227766016838;  // sqrt(1e-3)
  std::string lambdas = "1e-4,1e-3,1e-2";
  bool absolute_lambdas = false;  // otherwise fractions of lambda_max
  double rho = 1.2;
  double alpha = 1.8;
  int max_iters = 1000;
  double eps_abs = 1e-4;
  double eps_rel = 1e-3;
};

struct PipelineConfig {
  std::filesystem::path trips;
  std::filesystem::path out = "out";
  std::optional<std::filesystem::path> schema;
  std::optional<std::uint64_t> seed;
  int train = 0;  // 0: 80% of the valid rows
  int test = 0;   // 0: everything not used for training
  bool uniform_test = false;
  int k = 5;
  double weight_scale_km = 2.0;
  std::string lambdas = "auto";
  double rho = 1.2;
  double alpha = 1.8;  // echoed; the network solver does not over-relax
  double mu = 1e-3;
  double eps = 1e-3;  // consensus tolerance
  double eps_abs = 1e-6;
  double eps_rel = 1e-5;
  int max_iters = 20000;
  int k_assign = 5;
};

struct StatsConfig {
  std::filesystem::path trips;
  std::filesystem::path out = "out";
  std::optional<std::filesystem::path> schema;
};

struct GraphConfig {
  std::filesystem::path trips;
  std::filesystem::path out = "out";
  std::optional<std::filesystem::path> schema;
  int k = 5;
  double weight_scale_km = 2.0;
  double cut_km = 1.0;
};

struct PredictConfig {
  std::filesystem::path trips;
  std::filesystem::path model;
  std::filesystem::path train_nodes;
  std::filesystem::path standardization;
  std::filesystem::path out = "out";
  std::optional<std::filesystem::path> schema;
  int k_assign = 5;
};

/// Each command validates its config (ConfigError), writes its artifacts and
/// a manifest.json into `out`, and throws on failure.
void cmd_synth_lasso(const SynthLassoConfig& cfg);
void cmd_pipeline(const PipelineConfig& cfg);
void cmd_stats(const StatsConfig& cfg);
void cmd_graph(const GraphConfig& cfg);
void cmd_predict(const PredictConfig& cfg);

/// Full command-line entry point; returns the process exit status.
int run(int argc, char** argv);

/// "0.1,1e-3, 5" -> {0.1, 0.001, 5}. Errors name `field`.
std::vector<double> parse_lambda_list(const std::string& text, const std::string& field);

std::string sha256_hex(const std::filesystem::path& path);

/// 0 followed by 9 log-spaced values from 1e-3 to 100 times `level`.
std::vector<double> auto_lambda_grid(double level);

Table standardization_table(const Standardization& stats);
Standardization parse_standardization_table(const Table& table);

}  // namespace netlasso::cli
