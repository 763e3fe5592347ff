#pragma once

// Voxelwise encoding models: BOLD preprocessing, inter-subject reliability,
// design matrices, cross-validated ridge brain scores and region asymmetry.
//
// Matrices are scans x voxels (BOLD) or scans x features (designs), stored
// column-major as Eigen::MatrixXd.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace asymkit::encoding {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct BoldRun {
  Matrix data;  // scans x voxels
  double tr_seconds = 2.0;
  int run_index = 0;
};

enum class Hemisphere : std::uint8_t { left, right, other };

struct RegionMask {
  std::string name;
  std::vector<Hemisphere> labels;  // one per voxel
};

struct FeatureMatrix {
  Matrix values;                // events x feature dimensions
  std::vector<double> onsets;   // seconds, one per event row
  int layer_index = 0;
  std::int64_t checkpoint_tokens = 1;
  int run_index = 0;
};

struct BrainScoreMap {
  Vector scores;
  std::vector<int> layer_of_max;
  std::int64_t checkpoint_tokens = 1;
};

struct PreprocessResult {
  BoldRun run;
  std::vector<bool> flat;  // voxels with no variance left after detrending
};

/// Constant, linear and discrete-cosine regressors for every drift with a
/// period longer than `cutoff_seconds`. Columns are orthonormal.
Matrix drift_basis(Eigen::Index n_scans, double tr_seconds, double cutoff_seconds);

/// Removes drifts and z-scores each column (population sd). Columns whose
/// detrended sd is negligible relative to their input scale are zeroed and
/// reported in `flat`.
Matrix highpass_standardize(const Matrix& data, double tr_seconds, double cutoff_seconds,
                            std::vector<bool>* flat = nullptr);

PreprocessResult preprocess_run(const BoldRun& run, double cutoff_seconds = 128.0);

/// Element-wise mean over subjects of one run.
BoldRun average_subjects(std::span<const BoldRun> runs);

/// subjects[s][r] -> averaged run r.
std::vector<BoldRun> average_subjects(const std::vector<std::vector<BoldRun>>& subjects);

/// Pearson correlation; 0 when either operand has no variance.
double pearson(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

/// Column-wise Pearson correlation of two equally shaped matrices.
Vector column_correlations(const Matrix& a, const Matrix& b);

/// Leave-one-subject-out inter-subject correlation per voxel, runs
/// concatenated. subjects[s][r].
Vector isc_reliability(const std::vector<std::vector<BoldRun>>& subjects);

/// Indices (ascending) of the ceil(fraction * n) most reliable voxels.
/// Ties go to the lower index; NaN ranks last.
std::vector<std::size_t> top_fraction_mask(const Vector& reliability, double fraction = 0.25);

/// Double-gamma HRF sampled every `tr_seconds` over `duration_seconds`,
/// normalized to unit sum. Peak 6 s, undershoot 16 s, ratio 6.
std::vector<double> canonical_hrf(double tr_seconds, double duration_seconds = 32.0);

/// Bins events by onset into TR intervals (row sum per bin), convolves each
/// column with `hrf_kernel` and optionally z-scores the columns.
Matrix build_design(const FeatureMatrix& features, Eigen::Index n_scans, double tr_seconds,
                    std::span<const double> hrf_kernel, bool standardize = true);

/// Ten penalties log-spaced over [1, 1e6].
std::vector<double> default_lambda_grid();

struct RidgeCvFold {
  int held_out_run = 0;
  double lambda = 0.0;
  double inner_score = 0.0;  // mean held-in correlation at the chosen λ
};

struct RidgeCvResult {
  Vector scores;  // per voxel, mean over outer folds
  std::vector<RidgeCvFold> folds;
};

/// Nested leave-one-run-out ridge. The outer loop holds out each run; the
/// penalty for a fold is the grid value with the best mean correlation in
/// an inner leave-one-run-out over the training runs (first on ties).
RidgeCvResult ridge_cv(std::span<const Matrix> designs, std::span<const Matrix> bold,
                       std::span<const double> lambda_grid);

Vector ridge_cv_scores(std::span<const Matrix> designs, std::span<const Matrix> bold,
                       std::span<const double> lambda_grid);

/// Per-voxel maximum over layers; ties keep the lowest layer.
BrainScoreMap best_layer_map(std::span<const Vector> per_layer_scores,
                             std::int64_t checkpoint_tokens = 1);

enum class AsymmetrySign { left_minus_right, right_minus_left };

struct Asymmetry {
  double value = 0.0;
  double left_mean = 0.0;
  double right_mean = 0.0;
  std::size_t n_left = 0;
  std::size_t n_right = 0;
};

Asymmetry region_asymmetry(const Vector& scores, const RegionMask& mask,
                           const std::optional<std::vector<std::size_t>>& voxel_subset,
                           AsymmetrySign sign);

void check_mask(const RegionMask& mask);

}  // namespace asymkit::encoding
