#include "asymkit/synth.hpp"

#include <algorithm>
#include <cmath>

#include "asymkit/error.hpp"
#include "asymkit/rng.hpp"

namespace asymkit::synth {

using encoding::Matrix;

void check_spec(const SynthSpec& s) {
  if (s.n_subjects <= 0 || s.n_runs <= 0 || s.n_scans <= 0 || s.n_voxels <= 0 || s.n_features <= 0)
    throw ValidationError("synthetic dataset sizes must be positive");
  if (s.n_voxels % 2 != 0) throw ValidationError("n_voxels must be even (split into left/right halves)");
  if (!(s.tr_seconds > 0.0)) throw ValidationError("tr_seconds must be positive");
  if (!(s.snr_left >= 0.0) || !(s.snr_right >= 0.0)) throw ValidationError("signal amplitudes must be nonnegative");
  if (!(s.noise_sd > 0.0)) throw ValidationError("noise_sd must be positive");
}

SynthData make_synthetic(const SynthSpec& spec) {
  check_spec(spec);
  const auto hrf = encoding::canonical_hrf(spec.tr_seconds);
  const Eigen::Index n_vox = spec.n_voxels;
  const Eigen::Index n_feat = spec.n_features;
  const Eigen::Index n_scans = spec.n_scans;

  Matrix weights(n_feat, n_vox);
  {
    Rng rng(mix_seed(spec.seed, 0));
    for (Eigen::Index v = 0; v < n_vox; ++v)
      for (Eigen::Index f = 0; f < n_feat; ++f) weights(f, v) = rng.normal();
    for (Eigen::Index v = 0; v < n_vox; ++v) weights.col(v).normalize();
  }
  Eigen::VectorXd amplitude(n_vox);
  for (Eigen::Index v = 0; v < n_vox; ++v) amplitude(v) = v < n_vox / 2 ? spec.snr_left : spec.snr_right;

  SynthData out;
  const double run_end = static_cast<double>(n_scans) * spec.tr_seconds;
  for (int r = 0; r < spec.n_runs; ++r) {
    Rng rng(mix_seed(spec.seed, 1 + static_cast<std::uint64_t>(r)));
    encoding::FeatureMatrix f;
    f.layer_index = 0;
    f.checkpoint_tokens = 1;
    f.run_index = r;
    const auto n_events = static_cast<std::size_t>(n_scans);
    f.onsets.resize(n_events);
    for (auto& t : f.onsets) t = rng.uniform() * run_end;
    std::sort(f.onsets.begin(), f.onsets.end());
    f.values.resize(static_cast<Eigen::Index>(n_events), n_feat);
    for (Eigen::Index e = 0; e < f.values.rows(); ++e)
      for (Eigen::Index c = 0; c < n_feat; ++c) f.values(e, c) = rng.normal();
    const Matrix design = encoding::build_design(f, n_scans, spec.tr_seconds, hrf, true);
    out.signal.push_back(design * weights * amplitude.asDiagonal());
    out.features.push_back(std::move(f));
  }

  out.subjects.resize(static_cast<std::size_t>(spec.n_subjects));
  for (int s = 0; s < spec.n_subjects; ++s) {
    Rng rng(mix_seed(spec.seed, 1000 + static_cast<std::uint64_t>(s)));
    for (int r = 0; r < spec.n_runs; ++r) {
      encoding::BoldRun run;
      run.tr_seconds = spec.tr_seconds;
      run.run_index = r;
      run.data = out.signal[static_cast<std::size_t>(r)];
      for (Eigen::Index t = 0; t < n_scans; ++t)
        for (Eigen::Index v = 0; v < n_vox; ++v) run.data(t, v) += spec.noise_sd * rng.normal();
      out.subjects[static_cast<std::size_t>(s)].push_back(std::move(run));
    }
  }

  out.mask.name = "synthetic";
  out.mask.labels.resize(static_cast<std::size_t>(n_vox));
  for (Eigen::Index v = 0; v < n_vox; ++v)
    out.mask.labels[static_cast<std::size_t>(v)] =
        v < n_vox / 2 ? encoding::Hemisphere::left : encoding::Hemisphere::right;

  out.planted.snr_left = spec.snr_left;
  out.planted.snr_right = spec.snr_right;
  out.planted.sign = (spec.snr_left > spec.snr_right) - (spec.snr_left < spec.snr_right);
  return out;
}

}  // namespace asymkit::synth
