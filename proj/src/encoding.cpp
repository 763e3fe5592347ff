#include "asymkit/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "asymkit/error.hpp"
#include "asymkit/ridge.hpp"

namespace asymkit::encoding {

namespace {

// A centered sum of squares this small relative to the raw one is rounding
// noise around a constant.
constexpr double kFlatRelative = 1e-20;

bool is_flat(double centered_ss, double raw_ss) {
  return raw_ss <= 0.0 || centered_ss <= kFlatRelative * raw_ss;
}

// Z-scores columns in place (population sd); flat columns become zero.
void standardize_columns(Matrix& m, const Eigen::VectorXd& reference_ss, std::vector<bool>* flat) {
  const auto n = static_cast<double>(m.rows());
  if (flat) flat->assign(static_cast<std::size_t>(m.cols()), false);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    auto col = m.col(c);
    const double mean = col.sum() / n;
    col.array() -= mean;
    const double ss = col.squaredNorm();
    if (is_flat(ss, reference_ss(c))) {
      col.setZero();
      if (flat) (*flat)[static_cast<std::size_t>(c)] = true;
      continue;
    }
    col /= std::sqrt(ss / n);
  }
}

Matrix vstack(std::span<const Matrix> parts, const std::vector<std::size_t>& which) {
  Eigen::Index rows = 0;
  for (auto i : which) rows += parts[i].rows();
  Matrix out(rows, parts[which.front()].cols());
  Eigen::Index at = 0;
  for (auto i : which) {
    out.middleRows(at, parts[i].rows()) = parts[i];
    at += parts[i].rows();
  }
  return out;
}

double gamma_pdf(double t, double shape) {
  if (t <= 0.0) return 0.0;
  return std::exp((shape - 1.0) * std::log(t) - t - std::lgamma(shape));
}

}  // namespace

Matrix drift_basis(Eigen::Index n_scans, double tr_seconds, double cutoff_seconds) {
  if (!(cutoff_seconds > 0.0)) throw ValidationError("high-pass cutoff must be positive");
  if (!(tr_seconds > 0.0)) throw ValidationError("TR must be positive");
  if (n_scans < 2) throw ValidationError("a run needs at least 2 scans");
  const double n = static_cast<double>(n_scans);
  const auto n_cos = static_cast<Eigen::Index>(std::floor(2.0 * n * tr_seconds / cutoff_seconds));
  const Eigen::Index cols = std::min<Eigen::Index>(n_scans, 2 + n_cos);

  Matrix raw(n_scans, cols);
  for (Eigen::Index t = 0; t < n_scans; ++t) {
    raw(t, 0) = 1.0;
    if (cols > 1) raw(t, 1) = static_cast<double>(t) - (n - 1.0) / 2.0;
    for (Eigen::Index k = 1; k + 1 < cols; ++k) {
      raw(t, k + 1) = std::cos(std::numbers::pi * (2.0 * static_cast<double>(t) + 1.0) *
                               static_cast<double>(k) / (2.0 * n));
    }
  }
  Eigen::HouseholderQR<Matrix> qr(raw);
  return qr.householderQ() * Matrix::Identity(n_scans, cols);
}

Matrix highpass_standardize(const Matrix& data, double tr_seconds, double cutoff_seconds,
                            std::vector<bool>* flat) {
  const Matrix basis = drift_basis(data.rows(), tr_seconds, cutoff_seconds);
  Matrix out = data - basis * (basis.transpose() * data);
  const Eigen::VectorXd raw_ss = data.colwise().squaredNorm().transpose();
  standardize_columns(out, raw_ss, flat);
  return out;
}

PreprocessResult preprocess_run(const BoldRun& run, double cutoff_seconds) {
  if (!run.data.allFinite()) throw ValidationError("BOLD run has missing values");
  PreprocessResult r;
  r.run.tr_seconds = run.tr_seconds;
  r.run.run_index = run.run_index;
  r.run.data = highpass_standardize(run.data, run.tr_seconds, cutoff_seconds, &r.flat);
  return r;
}

BoldRun average_subjects(std::span<const BoldRun> runs) {
  if (runs.empty()) throw ValidationError("no subjects to average");
  BoldRun out = runs.front();
  for (std::size_t i = 1; i < runs.size(); ++i) {
    if (runs[i].data.rows() != out.data.rows() || runs[i].data.cols() != out.data.cols())
      throw ValidationError("subject " + std::to_string(i) + " has shape " +
                            std::to_string(runs[i].data.rows()) + "x" + std::to_string(runs[i].data.cols()) +
                            ", expected " + std::to_string(out.data.rows()) + "x" +
                            std::to_string(out.data.cols()));
    out.data += runs[i].data;
  }
  out.data /= static_cast<double>(runs.size());
  return out;
}

std::vector<BoldRun> average_subjects(const std::vector<std::vector<BoldRun>>& subjects) {
  if (subjects.empty()) throw ValidationError("no subjects to average");
  const std::size_t n_runs = subjects.front().size();
  std::vector<BoldRun> out;
  for (std::size_t r = 0; r < n_runs; ++r) {
    std::vector<BoldRun> slice;
    for (std::size_t s = 0; s < subjects.size(); ++s) {
      if (subjects[s].size() != n_runs)
        throw ValidationError("subject " + std::to_string(s) + " has " + std::to_string(subjects[s].size()) +
                              " runs, expected " + std::to_string(n_runs));
      slice.push_back(subjects[s][r]);
    }
    out.push_back(average_subjects(slice));
  }
  return out;
}

double pearson(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  if (a.size() != b.size()) throw ValidationError("correlation operands differ in length");
  if (a.size() < 2) return 0.0;
  const double n = static_cast<double>(a.size());
  const Vector ca = a.array() - a.sum() / n;
  const Vector cb = b.array() - b.sum() / n;
  const double ssa = ca.squaredNorm();
  const double ssb = cb.squaredNorm();
  if (is_flat(ssa, a.squaredNorm()) || is_flat(ssb, b.squaredNorm())) return 0.0;
  return std::clamp(ca.dot(cb) / std::sqrt(ssa * ssb), -1.0, 1.0);
}

Vector column_correlations(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ValidationError("correlation operands differ in shape");
  Vector out(a.cols());
  for (Eigen::Index c = 0; c < a.cols(); ++c) out(c) = pearson(a.col(c), b.col(c));
  return out;
}

Vector isc_reliability(const std::vector<std::vector<BoldRun>>& subjects) {
  const std::size_t n_sub = subjects.size();
  if (n_sub < 2) throw ValidationError("inter-subject correlation needs at least 2 subjects");
  const std::size_t n_runs = subjects.front().size();
  if (n_runs == 0) throw ValidationError("subjects have no runs");
  Eigen::Index total_rows = 0;
  const Eigen::Index n_vox = subjects.front().front().data.cols();
  for (std::size_t r = 0; r < n_runs; ++r) total_rows += subjects.front()[r].data.rows();
  for (std::size_t s = 0; s < n_sub; ++s) {
    if (subjects[s].size() != n_runs) throw ValidationError("subjects differ in run count");
    for (std::size_t r = 0; r < n_runs; ++r) {
      const auto& d = subjects[s][r].data;
      if (d.rows() != subjects.front()[r].data.rows() || d.cols() != n_vox)
        throw ValidationError("subject " + std::to_string(s) + " run " + std::to_string(r) + " differs in shape");
    }
  }

  std::vector<Matrix> totals(n_runs);
  for (std::size_t r = 0; r < n_runs; ++r) {
    totals[r] = subjects[0][r].data;
    for (std::size_t s = 1; s < n_sub; ++s) totals[r] += subjects[s][r].data;
  }

  Vector isc = Vector::Zero(n_vox);
  Matrix own(total_rows, n_vox), others(total_rows, n_vox);
  const double denom = static_cast<double>(n_sub - 1);
  for (std::size_t i = 0; i < n_sub; ++i) {
    Eigen::Index at = 0;
    for (std::size_t r = 0; r < n_runs; ++r) {
      const auto& d = subjects[i][r].data;
      own.middleRows(at, d.rows()) = d;
      others.middleRows(at, d.rows()) = (totals[r] - d) / denom;
      at += d.rows();
    }
    isc += column_correlations(own, others);
  }
  return isc / static_cast<double>(n_sub);
}

std::vector<std::size_t> top_fraction_mask(const Vector& reliability, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw ValidationError("reliability fraction must lie in (0, 1]");
  const auto n = static_cast<std::size_t>(reliability.size());
  if (n == 0) return {};
  // The small slack keeps e.g. 0.1 * 30 from rounding up to 4.
  auto keep = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  keep = std::clamp<std::size_t>(keep, 1, n);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto rank_before = [&](std::size_t a, std::size_t b) {
    const double va = reliability(static_cast<Eigen::Index>(a));
    const double vb = reliability(static_cast<Eigen::Index>(b));
    const bool na = std::isnan(va), nb = std::isnan(vb);
    if (na != nb) return nb;
    if (!na && va != vb) return va > vb;
    return a < b;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(), rank_before);
  order.resize(keep);
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<double> canonical_hrf(double tr_seconds, double duration_seconds) {
  if (!(tr_seconds > 0.0)) throw ValidationError("TR must be positive");
  const auto n = static_cast<std::size_t>(std::floor(duration_seconds / tr_seconds)) + 1;
  std::vector<double> h(n);
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double t = static_cast<double>(j) * tr_seconds;
    h[j] = gamma_pdf(t, 6.0) - gamma_pdf(t, 16.0) / 6.0;
    sum += h[j];
  }
  for (double& v : h) v /= sum;
  return h;
}

Matrix build_design(const FeatureMatrix& features, Eigen::Index n_scans, double tr_seconds,
                    std::span<const double> hrf_kernel, bool standardize) {
  if (n_scans <= 0) throw ValidationError("design needs a positive scan count");
  if (!(tr_seconds > 0.0)) throw ValidationError("TR must be positive");
  if (hrf_kernel.empty()) throw ValidationError("HRF kernel is empty");
  const auto n_events = static_cast<std::size_t>(features.values.rows());
  if (features.onsets.size() != n_events)
    throw ValidationError(std::to_string(features.onsets.size()) + " onsets for " + std::to_string(n_events) +
                          " feature rows");
  const double run_end = static_cast<double>(n_scans) * tr_seconds;

  Matrix binned = Matrix::Zero(n_scans, features.values.cols());
  for (std::size_t e = 0; e < n_events; ++e) {
    const double onset = features.onsets[e];
    if (!(onset >= 0.0)) throw ValidationError("event " + std::to_string(e) + " has a negative onset");
    if (e > 0 && onset < features.onsets[e - 1])
      throw ValidationError("event onsets decrease at row " + std::to_string(e));
    if (onset >= run_end)
      throw ValidationError("event " + std::to_string(e) + " at " + std::to_string(onset) +
                            " s lies past the run end (" + std::to_string(run_end) + " s)");
    const auto bin = static_cast<Eigen::Index>(std::floor(onset / tr_seconds));
    binned.row(bin) += features.values.row(static_cast<Eigen::Index>(e));
  }

  Matrix design = Matrix::Zero(n_scans, binned.cols());
  const auto taps = static_cast<Eigen::Index>(hrf_kernel.size());
  for (Eigen::Index t = 0; t < n_scans; ++t) {
    for (Eigen::Index j = 0; j < taps && j <= t; ++j) {
      design.row(t) += hrf_kernel[static_cast<std::size_t>(j)] * binned.row(t - j);
    }
  }
  if (standardize) {
    const Eigen::VectorXd raw_ss = design.colwise().squaredNorm().transpose();
    standardize_columns(design, raw_ss, nullptr);
  }
  return design;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid(10);
  for (int i = 0; i < 10; ++i) grid[static_cast<std::size_t>(i)] = std::pow(10.0, 6.0 * i / 9.0);
  return grid;
}

RidgeCvResult ridge_cv(std::span<const Matrix> designs, std::span<const Matrix> bold,
                       std::span<const double> lambda_grid) {
  const std::size_t n_runs = designs.size();
  if (n_runs < 3) throw ValidationError("cross-validated ridge needs at least 3 runs, got " + std::to_string(n_runs));
  if (bold.size() != n_runs) throw ValidationError("design and BOLD run counts differ");
  if (lambda_grid.empty()) throw ValidationError("empty penalty grid");
  for (double l : lambda_grid)
    if (!(l > 0.0) || !std::isfinite(l)) throw ValidationError("penalties must be positive and finite");
  for (std::size_t r = 0; r < n_runs; ++r) {
    if (designs[r].rows() != bold[r].rows())
      throw ValidationError("run " + std::to_string(r) + ": design has " + std::to_string(designs[r].rows()) +
                            " rows, BOLD has " + std::to_string(bold[r].rows()));
    if (designs[r].cols() != designs[0].cols()) throw ValidationError("runs differ in feature count");
    if (bold[r].cols() != bold[0].cols()) throw ValidationError("runs differ in voxel count");
  }

  RidgeCvResult result;
  result.scores = Vector::Zero(bold[0].cols());
  for (std::size_t outer = 0; outer < n_runs; ++outer) {
    std::vector<std::size_t> train;
    for (std::size_t r = 0; r < n_runs; ++r)
      if (r != outer) train.push_back(r);

    std::vector<double> inner_score(lambda_grid.size(), 0.0);
    for (std::size_t held : train) {
      std::vector<std::size_t> fit_runs;
      for (auto r : train)
        if (r != held) fit_runs.push_back(r);
      const ridge::Solver solver(vstack(designs, fit_runs), vstack(bold, fit_runs));
      for (std::size_t l = 0; l < lambda_grid.size(); ++l) {
        const Matrix pred = solver.predict(designs[held], lambda_grid[l]);
        inner_score[l] += column_correlations(pred, bold[held]).mean();
      }
    }
    std::size_t best = 0;
    for (std::size_t l = 1; l < lambda_grid.size(); ++l)
      if (inner_score[l] > inner_score[best]) best = l;

    const ridge::Solver solver(vstack(designs, train), vstack(bold, train));
    const Matrix pred = solver.predict(designs[outer], lambda_grid[best]);
    result.scores += column_correlations(pred, bold[outer]);
    result.folds.push_back(RidgeCvFold{static_cast<int>(outer), lambda_grid[best],
                                       inner_score[best] / static_cast<double>(train.size())});
  }
  result.scores /= static_cast<double>(n_runs);
  return result;
}

Vector ridge_cv_scores(std::span<const Matrix> designs, std::span<const Matrix> bold,
                       std::span<const double> lambda_grid) {
  return ridge_cv(designs, bold, lambda_grid).scores;
}

BrainScoreMap best_layer_map(std::span<const Vector> per_layer_scores, std::int64_t checkpoint_tokens) {
  if (per_layer_scores.empty()) throw ValidationError("best-layer map needs at least one layer");
  const auto n = per_layer_scores.front().size();
  BrainScoreMap map;
  map.checkpoint_tokens = checkpoint_tokens;
  map.scores = per_layer_scores.front();
  map.layer_of_max.assign(static_cast<std::size_t>(n), 0);
  for (std::size_t l = 1; l < per_layer_scores.size(); ++l) {
    const auto& s = per_layer_scores[l];
    if (s.size() != n)
      throw ValidationError("layer " + std::to_string(l) + " has " + std::to_string(s.size()) +
                            " voxels, expected " + std::to_string(n));
    for (Eigen::Index v = 0; v < n; ++v) {
      if (s(v) > map.scores(v)) {
        map.scores(v) = s(v);
        map.layer_of_max[static_cast<std::size_t>(v)] = static_cast<int>(l);
      }
    }
  }
  return map;
}

void check_mask(const RegionMask& mask) {
  bool left = false, right = false;
  for (auto h : mask.labels) {
    left |= h == Hemisphere::left;
    right |= h == Hemisphere::right;
  }
  if (!left || !right) throw ValidationError("region mask '" + mask.name + "' needs both left and right voxels");
}

Asymmetry region_asymmetry(const Vector& scores, const RegionMask& mask,
                           const std::optional<std::vector<std::size_t>>& voxel_subset,
                           AsymmetrySign sign) {
  const auto n = static_cast<std::size_t>(scores.size());
  if (mask.labels.size() != n)
    throw ValidationError("region mask '" + mask.name + "' has " + std::to_string(mask.labels.size()) +
                          " labels for " + std::to_string(n) + " voxels");
  std::vector<std::size_t> voxels;
  if (voxel_subset) {
    voxels = *voxel_subset;
    std::sort(voxels.begin(), voxels.end());
    voxels.erase(std::unique(voxels.begin(), voxels.end()), voxels.end());
    if (!voxels.empty() && voxels.back() >= n) throw ValidationError("voxel subset index out of range");
  } else {
    voxels.resize(n);
    std::iota(voxels.begin(), voxels.end(), 0);
  }
  Asymmetry a;
  double left_sum = 0.0, right_sum = 0.0;
  for (auto v : voxels) {
    const double s = scores(static_cast<Eigen::Index>(v));
    if (mask.labels[v] == Hemisphere::left) {
      left_sum += s;
      ++a.n_left;
    } else if (mask.labels[v] == Hemisphere::right) {
      right_sum += s;
      ++a.n_right;
    }
  }
  if (a.n_left == 0) throw ValidationError("no left voxels of region '" + mask.name + "' in the selection");
  if (a.n_right == 0) throw ValidationError("no right voxels of region '" + mask.name + "' in the selection");
  a.left_mean = left_sum / static_cast<double>(a.n_left);
  a.right_mean = right_sum / static_cast<double>(a.n_right);
  a.value = sign == AsymmetrySign::left_minus_right ? a.left_mean - a.right_mean : a.right_mean - a.left_mean;
  return a;
}

}  // namespace asymkit::encoding
