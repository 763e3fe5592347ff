#pragma once

// Sigmoid fits to training trajectories over x = log10(tokens seen),
// display alignment of curves and distances in the (x0, beta) plane.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace asymkit::transition {

struct TrajectoryPoint {
  double tokens = 0.0;
  double value = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  std::string label;
};

/// Throws ValidationError unless there are >= 4 points with positive,
/// distinct token counts and finite values.
void check_trajectory(const Trajectory& t);

/// y = y_min + (y_max - y_min) / (1 + exp(-beta (x - x0)))
struct SigmoidFit {
  std::string label;
  double y_min = 0.0;
  double y_max = 0.0;
  double x0 = 0.0;    // log10 tokens; NaN when degenerate
  double beta = 0.0;  // per log10 unit; 0 when degenerate
  double mse = 0.0;
  bool degenerate = false;
};

double sigmoid(double x, double y_min, double y_max, double x0, double beta);

/// Multi-start Nelder-Mead on the mean squared error, beta kept positive.
/// Point order does not matter.
SigmoidFit fit_sigmoid(const Trajectory& t);

struct Alignment {
  Trajectory aligned;  // curve values mapped through scale * y + offset
  double scale = 1.0;
  double offset = 0.0;
  double objective = 0.0;  // mean absolute deviation on the reference grid
};

/// Affine map of `curve` minimizing mean |scale * y + offset - r| against
/// `reference`, with the curve linearly interpolated (in log10 tokens) onto
/// the reference points it covers. With `pin_offset` the offset is 0.
Alignment align_curve(const Trajectory& curve, const Trajectory& reference,
                      bool pin_offset = false);

/// Euclidean distance in the (x0, beta) plane. Degenerate fits have no
/// transition and raise ValidationError.
double transition_distance(const SigmoidFit& a, const SigmoidFit& b);

}  // namespace asymkit::transition
