#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace limo {

// Flat key=value configuration with [section] headers. Every key is
// validated against the registry below before any stage runs; unknown keys
// are rejected with the offending name. Precedence: defaults, then file,
// then LIMO_* environment overrides, then command-line flags.
struct RunConfig {
  // model
  int model_n = 72;
  int model_d = 19;  // must match the built-in alphabet
  int model_m = 64;
  int model_hidden = 256;

  // train (VAE)
  int train_epochs = 18;
  double train_lr = 1e-4;
  int train_batch = 64;
  std::uint64_t train_seed = 0;
  double train_recon_weight = 0.9;
  double train_kl_weight = 0.1;

  // predictor
  int predictor_dataset = 4000;
  int predictor_epochs = 40;
  std::string predictor_mode = "decoded";  // decoded | latent
  int predictor_hidden = 128;
  std::uint64_t predictor_seed = 0;

  // optimize
  int optimize_steps = 1000;
  double optimize_lr = 0.1;
  int optimize_restarts = 200;
  double optimize_lambda = 1000.0;
  double optimize_w_affinity = 1.0;
  double optimize_w_qed = 2.0;
  double optimize_w_sa = 0.5;

  // filter
  double filter_qed_min = 0.4;
  double filter_sa_max = 5.5;

  // oracle
  std::string oracle_command;
  double oracle_timeout = 30.0;
  int oracle_parallelism = 8;
  std::string oracle_cache;  // path; empty disables caching

  // report
  bool report_timing = true;

  // runtime
  int runtime_threads = 1;

  // paths
  std::string paths_out_dir = ".";
  std::string paths_corpus;
  std::string paths_vae_checkpoint;
  std::string paths_predictor_checkpoint;

  // Canonical serialization (sections and keys in registry order).
  std::string serialize() const;
};

// Parses file content; throws std::invalid_argument naming any unknown key
// or malformed line. `source` appears in error messages.
RunConfig parse_config(const std::string& text, const std::string& source);
RunConfig load_config_file(const std::string& path);

// Applies LIMO_<SECTION>_<KEY> environment overrides.
void apply_env_overrides(RunConfig& config);

// Applies one "section.key=value" override; throws on unknown key.
void apply_override(RunConfig& config, const std::string& key,
                    const std::string& value);

// All registered "section.key" names, registry order.
std::vector<std::string> config_keys();

// FNV-1a of the canonical serialization plus any extra provenance strings
// (checkpoint digests, seeds); fixed-width hex.
std::string run_id(const RunConfig& config,
                   const std::vector<std::string>& extra);

}  // namespace limo
