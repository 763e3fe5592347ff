#pragma once

#include <cstdint>
#include <vector>

#include "asymkit/encoding.hpp"

namespace asymkit::synth {

struct SynthSpec {
  int n_subjects = 4;
  int n_runs = 9;
  int n_scans = 200;
  int n_voxels = 200;
  int n_features = 20;
  double tr_seconds = 2.0;
  double snr_left = 1.0;
  double snr_right = 0.5;
  double noise_sd = 1.0;
  std::uint64_t seed = 0;
};

void check_spec(const SynthSpec& spec);

struct PlantedAsymmetry {
  double snr_left = 0.0;
  double snr_right = 0.0;
  int sign = 0;  // sign of snr_left - snr_right
};

struct SynthData {
  std::vector<std::vector<encoding::BoldRun>> subjects;  // [subject][run]
  std::vector<encoding::FeatureMatrix> features;         // one per run, layer 0
  std::vector<encoding::Matrix> signal;                  // noiseless BOLD per run
  encoding::RegionMask mask;                             // first half left
  PlantedAsymmetry planted;
};

/// Seeds are derived with mix_seed(seed, stream): stream 0 for the voxel
/// weights, 1 + run for each run's events, 1000 + subject for noise.
SynthData make_synthetic(const SynthSpec& spec);

}  // namespace asymkit::synth
