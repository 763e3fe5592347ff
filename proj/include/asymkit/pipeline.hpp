#pragma once

// End-to-end commands behind the command-line tool. Every artifact is
// written atomically and carries the hash of the effective configuration
// that produced it, so reruns on unchanged inputs are byte-identical.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "asymkit/corpus.hpp"
#include "asymkit/encoding.hpp"
#include "asymkit/scoring.hpp"
#include "asymkit/synth.hpp"
#include "asymkit/transition.hpp"

namespace asymkit::pipeline {

namespace fs = std::filesystem;

enum class GenKind { arithmetic, dyck, agreement };

struct GenRequest {
  GenKind kind = GenKind::dyck;
  corpus::ArithmeticSpec arithmetic;
  corpus::DyckSpec dyck;
  corpus::AgreementSpec agreement;
  int training_sentences = 0;  // agreement only: also write a training corpus
  fs::path out;
};

struct GenReport {
  std::size_t n_pairs = 0;
  std::string config_hash;
  fs::path manifest;
  std::optional<fs::path> training_corpus;
};

/// Writes the suite JSONL at `out` and `<out>.manifest.json`.
GenReport run_gen(const GenRequest& request);

struct ScoreRequest {
  fs::path suite;
  std::optional<fs::path> dump;          // log-prob dump to score
  std::optional<fs::path> ngram_corpus;  // or: train an n-gram model here
  int ngram_order = 3;
  double ngram_alpha = 0.1;
  std::optional<fs::path> write_dump;  // save the n-gram dump
  fs::path out;                        // JSON report
};

scoring::SuiteAccuracy run_score(const ScoreRequest& request);

/// Effective brain-score configuration after defaults, file and overrides.
struct ExperimentConfig {
  struct Checkpoint {
    std::int64_t tokens = 0;
    std::vector<std::vector<fs::path>> layers;  // [layer][run] feature files
  };
  std::vector<std::vector<fs::path>> subjects;  // [subject][run] BOLD files
  std::vector<Checkpoint> checkpoints;
  std::vector<double> lambda_grid = encoding::default_lambda_grid();
  double cutoff_seconds = 128.0;
  std::string hrf = "double_gamma";  // or "none"
  std::optional<double> reliability_fraction = 0.25;  // nullopt: whole brain
  fs::path region_mask;
  encoding::AsymmetrySign sign = encoding::AsymmetrySign::left_minus_right;
  int workers = 1;
  fs::path output_dir;
};

struct BrainscoreOverrides {
  std::optional<fs::path> output_dir;
  std::optional<double> reliability_fraction;
  bool whole_brain = false;
  std::optional<encoding::AsymmetrySign> sign;
  std::optional<double> cutoff_seconds;
  std::optional<int> workers;
};

/// Parses the JSON experiment file (paths relative to it) and applies
/// overrides. Throws ValidationError/IoError on bad fields or missing files.
ExperimentConfig load_experiment(const fs::path& path, const BrainscoreOverrides& overrides = {});

/// Canonical JSON of an effective configuration; its hash tags artifacts.
std::string experiment_json(const ExperimentConfig& config);

struct CheckpointResult {
  std::int64_t tokens = 0;
  encoding::BrainScoreMap map;
  encoding::Asymmetry asymmetry;
};

struct BrainscoreReport {
  std::string config_hash;
  std::vector<CheckpointResult> checkpoints;  // ascending tokens
  fs::path asymmetry_csv;
};

BrainscoreReport run_brainscore(const ExperimentConfig& config);

struct TransitionRequest {
  std::vector<fs::path> trajectories;
  std::string reference_label = "asymmetry";  // falls back to the first curve
  bool scale_only = false;
  fs::path out_dir;
};

struct TransitionReport {
  std::string config_hash;
  std::vector<transition::SigmoidFit> fits;
  std::string reference;
  std::vector<std::pair<std::string, double>> distances;  // ascending
  std::vector<std::string> warnings;
};

TransitionReport run_transition(const TransitionRequest& request);

struct SynthRequest {
  synth::SynthSpec spec;
  int checkpoints = 1;  // > 1: feature quality rises along a sigmoid
  fs::path out_dir;
};

struct SynthReport {
  std::string config_hash;
  fs::path experiment;
};

/// Writes BOLD runs, features, onsets, mask and a ready-to-run experiment
/// file under `out_dir`.
SynthReport run_synth(const SynthRequest& request);

}  // namespace asymkit::pipeline
