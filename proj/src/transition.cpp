#include "asymkit/transition.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>

#include "asymkit/error.hpp"

namespace asymkit::transition {

namespace {

template <std::size_t N>
using Point = std::array<double, N>;

template <std::size_t N>
struct Minimum {
  Point<N> at{};
  double value = std::numeric_limits<double>::infinity();
};

// Nelder-Mead with standard coefficients. Stops when the simplex collapses
// below `xtol` in every coordinate and the spread of values drops below
// `ftol`, or after `max_iter` iterations.
template <std::size_t N>
Minimum<N> nelder_mead(const std::function<double(const Point<N>&)>& f, const Point<N>& start,
                       const Point<N>& step, double xtol, double ftol, int max_iter) {
  std::array<Point<N>, N + 1> simplex;
  std::array<double, N + 1> values;
  simplex[0] = start;
  for (std::size_t i = 0; i < N; ++i) {
    simplex[i + 1] = start;
    simplex[i + 1][i] += step[i];
  }
  for (std::size_t i = 0; i <= N; ++i) values[i] = f(simplex[i]);

  std::array<std::size_t, N + 1> order;
  for (int iter = 0; iter < max_iter; ++iter) {
    for (std::size_t i = 0; i <= N; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[N - 1];

    double spread = 0.0;
    for (std::size_t i = 0; i <= N; ++i)
      for (std::size_t d = 0; d < N; ++d) spread = std::max(spread, std::abs(simplex[i][d] - simplex[best][d]));
    if (spread <= xtol && values[worst] - values[best] <= ftol) break;

    Point<N> centroid{};
    for (std::size_t i = 0; i <= N; ++i) {
      if (i == worst) continue;
      for (std::size_t d = 0; d < N; ++d) centroid[d] += simplex[i][d] / static_cast<double>(N);
    }
    auto along = [&](double t) {
      Point<N> p;
      for (std::size_t d = 0; d < N; ++d) p[d] = centroid[d] + t * (simplex[worst][d] - centroid[d]);
      return p;
    };

    const Point<N> reflected = along(-1.0);
    const double fr = f(reflected);
    if (fr < values[best]) {
      const Point<N> expanded = along(-2.0);
      const double fe = f(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = reflected;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    const Point<N> contracted = along(outside ? -0.5 : 0.5);
    const double fc = f(contracted);
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = contracted;
      values[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= N; ++i) {
      if (i == best) continue;
      for (std::size_t d = 0; d < N; ++d) simplex[i][d] = simplex[best][d] + 0.5 * (simplex[i][d] - simplex[best][d]);
      values[i] = f(simplex[i]);
    }
  }
  Minimum<N> m;
  for (std::size_t i = 0; i <= N; ++i) {
    if (values[i] < m.value) {
      m.value = values[i];
      m.at = simplex[i];
    }
  }
  return m;
}

// Repeats Nelder-Mead from the incumbent until it stops improving; a fresh
// simplex escapes the premature collapses the method is known for.
template <std::size_t N>
Minimum<N> polish(const std::function<double(const Point<N>&)>& f, const Point<N>& start,
                  const Point<N>& step, double xtol, double ftol) {
  Minimum<N> best = nelder_mead<N>(f, start, step, xtol, ftol, 4000);
  for (int restart = 0; restart < 8; ++restart) {
    Point<N> small = step;
    for (auto& s : small) s *= 0.1;
    const Minimum<N> next = nelder_mead<N>(f, best.at, small, xtol, ftol, 4000);
    const bool improved = next.value < best.value - 1e-14 * std::abs(best.value);
    if (next.value < best.value) best = next;
    if (!improved) break;
  }
  return best;
}

struct Sorted {
  std::vector<double> x;  // log10 tokens, ascending
  std::vector<double> y;
};

Sorted sorted_log(const Trajectory& t) {
  std::vector<TrajectoryPoint> pts = t.points;
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.tokens < b.tokens; });
  Sorted s;
  for (const auto& p : pts) {
    s.x.push_back(std::log10(p.tokens));
    s.y.push_back(p.value);
  }
  return s;
}

// Type-7 (linear interpolation) sample quantile of sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

void check_trajectory(const Trajectory& t) {
  const auto name = t.label.empty() ? std::string("trajectory") : "trajectory '" + t.label + "'";
  if (t.points.size() < 4)
    throw ValidationError(name + " has " + std::to_string(t.points.size()) + " points; at least 4 are needed");
  std::vector<double> tokens;
  for (const auto& p : t.points) {
    if (!(p.tokens > 0.0) || !std::isfinite(p.tokens)) throw ValidationError(name + ": tokens must be positive");
    if (!std::isfinite(p.value)) throw ValidationError(name + ": values must be finite");
    tokens.push_back(p.tokens);
  }
  std::sort(tokens.begin(), tokens.end());
  if (std::adjacent_find(tokens.begin(), tokens.end()) != tokens.end())
    throw ValidationError(name + ": token counts must be distinct");
}

double sigmoid(double x, double y_min, double y_max, double x0, double beta) {
  return y_min + (y_max - y_min) / (1.0 + std::exp(-beta * (x - x0)));
}

SigmoidFit fit_sigmoid(const Trajectory& t) {
  check_trajectory(t);
  const Sorted s = sorted_log(t);
  const auto n = static_cast<double>(s.y.size());
  const double lo = *std::min_element(s.y.begin(), s.y.end());
  const double hi = *std::max_element(s.y.begin(), s.y.end());
  const double range = hi - lo;

  SigmoidFit fit;
  fit.label = t.label;
  if (range < 1e-6 * std::max(1.0, std::abs(hi))) {
    double mean = 0.0;
    for (double v : s.y) mean += v / n;
    double mse = 0.0;
    for (double v : s.y) mse += (v - mean) * (v - mean) / n;
    fit.y_min = fit.y_max = mean;
    fit.x0 = std::numeric_limits<double>::quiet_NaN();
    fit.beta = 0.0;
    fit.mse = mse;
    fit.degenerate = true;
    return fit;
  }

  // Fit on values rescaled to [0, 1] so the search path does not depend on
  // the units of y. Parameters: (y_min, log(y_max - y_min), x0, log beta),
  // which keeps both the height and the slope positive.
  std::vector<double> u(s.y.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = (s.y[i] - lo) / range;
  const std::function<double(const Point<4>&)> objective = [&](const Point<4>& p) {
    const double beta = std::exp(p[3]);
    double sse = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double r = u[i] - sigmoid(s.x[i], p[0], p[0] + std::exp(p[1]), p[2], beta);
      sse += r * r;
    }
    return sse / n;
  };

  const double x_span = std::max(s.x.back() - s.x.front(), 1e-3);
  const Point<4> step = {0.1, 0.1, 0.1 * x_span, 0.3};
  Minimum<4> best;
  for (double q : {0.25, 0.5, 0.75}) {
    for (double beta : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
      const Point<4> start = {0.0, 0.0, quantile(s.x, q), std::log(beta)};
      const Minimum<4> m = polish<4>(objective, start, step, 1e-10, 1e-30);
      if (m.value < best.value) best = m;
    }
  }
  fit.y_min = lo + range * best.at[0];
  fit.y_max = lo + range * (best.at[0] + std::exp(best.at[1]));
  fit.x0 = best.at[2];
  fit.beta = std::exp(best.at[3]);
  fit.mse = best.value * range * range;
  fit.degenerate = false;
  return fit;
}

Alignment align_curve(const Trajectory& curve, const Trajectory& reference, bool pin_offset) {
  check_trajectory(curve);
  check_trajectory(reference);
  const Sorted c = sorted_log(curve);
  const Sorted r = sorted_log(reference);

  std::vector<double> ys, rs;
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    const double x = r.x[i];
    if (x < c.x.front() || x > c.x.back()) continue;
    auto hi = static_cast<std::size_t>(std::lower_bound(c.x.begin(), c.x.end(), x) - c.x.begin());
    double y;
    if (c.x[hi] == x) {
      y = c.y[hi];
    } else {
      const std::size_t lo = hi - 1;
      const double w = (x - c.x[lo]) / (c.x[hi] - c.x[lo]);
      y = c.y[lo] + w * (c.y[hi] - c.y[lo]);
    }
    ys.push_back(y);
    rs.push_back(r.y[i]);
  }
  if (ys.empty())
    throw ValidationError("curves '" + curve.label + "' and '" + reference.label + "' have disjoint x ranges");
  if (ys.size() < 2)
    throw ValidationError("curves '" + curve.label + "' and '" + reference.label + "' overlap at a single point");

  const auto m = ys.size();
  auto mad = [&](double a, double b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) sum += std::abs(a * ys[i] + b - rs[i]);
    return sum / static_cast<double>(m);
  };

  // Least-squares start.
  double a0 = 1.0, b0 = 0.0;
  {
    double my = 0.0, mr = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      my += ys[i] / static_cast<double>(m);
      mr += rs[i] / static_cast<double>(m);
    }
    double syy = 0.0, syr = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      syy += (ys[i] - my) * (ys[i] - my);
      syr += (ys[i] - my) * (rs[i] - mr);
    }
    if (pin_offset) {
      double yy = 0.0, yr = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        yy += ys[i] * ys[i];
        yr += ys[i] * rs[i];
      }
      a0 = yy > 0.0 ? yr / yy : 1.0;
    } else if (syy > 0.0) {
      a0 = syr / syy;
      b0 = mr - a0 * my;
    } else {
      b0 = mr - my;
    }
  }

  double best_a = a0, best_b = b0, best = mad(a0, b0);
  {
    double scale = 0.0;
    for (double v : rs) scale = std::max(scale, std::abs(v));
    scale = std::max(scale, 1e-12);
    const double a_step = std::max(std::abs(a0) * 0.1, 1e-3);
    if (pin_offset) {
      const std::function<double(const Point<1>&)> f = [&](const Point<1>& p) { return mad(p[0], 0.0); };
      const auto res = polish<1>(f, {a0}, {a_step}, 1e-14, 0.0);
      if (res.value < best) {
        best = res.value;
        best_a = res.at[0];
      }
    } else {
      const std::function<double(const Point<2>&)> f = [&](const Point<2>& p) { return mad(p[0], p[1]); };
      const auto res = polish<2>(f, {a0, b0}, {a_step, 0.1 * scale}, 1e-14, 0.0);
      if (res.value < best) {
        best = res.value;
        best_a = res.at[0];
        best_b = res.at[1];
      }
    }
  }

  // The objective is piecewise linear, so an optimum sits on a line through
  // two data points (one point when the offset is pinned). Checking those
  // vertices makes the result exact for moderate grids.
  if (m <= 400) {
    if (pin_offset) {
      for (std::size_t i = 0; i < m; ++i) {
        if (ys[i] == 0.0) continue;
        const double a = rs[i] / ys[i];
        const double v = mad(a, 0.0);
        if (v < best) {
          best = v;
          best_a = a;
        }
      }
    } else {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
          if (ys[i] == ys[j]) continue;
          const double a = (rs[i] - rs[j]) / (ys[i] - ys[j]);
          const double b = rs[i] - a * ys[i];
          const double v = mad(a, b);
          if (v < best) {
            best = v;
            best_a = a;
            best_b = b;
          }
        }
      }
    }
  }

  Alignment out;
  out.scale = best_a;
  out.offset = pin_offset ? 0.0 : best_b;
  out.objective = best;
  out.aligned.label = curve.label;
  for (const auto& p : curve.points) out.aligned.points.push_back({p.tokens, out.scale * p.value + out.offset});
  return out;
}

double transition_distance(const SigmoidFit& a, const SigmoidFit& b) {
  for (const auto* f : {&a, &b}) {
    if (f->degenerate)
      throw ValidationError("no transition: fit '" + f->label + "' is degenerate");
  }
  return std::hypot(a.x0 - b.x0, a.beta - b.beta);
}

}  // namespace asymkit::transition
