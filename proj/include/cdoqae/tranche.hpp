#pragma once

// Tranche payoff and its piecewise-linear description.

#include <cstdint>
#include <string>
#include <vector>

namespace cdoqae::pricing {

/// Loss layer [lower, upper]: absorbs pool losses above `lower`, capped at the
/// notional upper - lower.
struct Tranche {
  std::string name;
  std::int64_t lower = 0;
  std::int64_t upper = 1;

  void validate() const;
  double notional() const { return static_cast<double>(upper - lower); }

  friend bool operator==(const Tranche&, const Tranche&) = default;
};

/// min(upper - lower, max(0, loss - lower)).
double tranche_loss(double loss, const Tranche& tranche);

/// Piecewise-linear function on integer losses. Segment k starts at
/// breakpoints[k] with value offsets[k] (the value at the segment start, not
/// its y-intercept) and rises with slopes[k]. The objective rotation maps
/// f in [f_min, f_max] onto amplitude angles pi/4 - c .. pi/4 + c.
struct PiecewiseSpec {
  std::vector<std::int64_t> breakpoints;
  std::vector<double> slopes;
  std::vector<double> offsets;
  double f_min = 0.0;
  double f_max = 1.0;
  double c = 0.25;

  /// Throws kInvalidArgument unless the arrays describe a continuous,
  /// non-decreasing function starting at breakpoint 0 and c lies in (0, 0.5).
  void validate() const;
  double evaluate(double loss) const;

  friend bool operator==(const PiecewiseSpec&, const PiecewiseSpec&) = default;
};

PiecewiseSpec tranche_to_piecewise(const Tranche& tranche, std::int64_t max_loss, double c);

}  // namespace cdoqae::pricing
