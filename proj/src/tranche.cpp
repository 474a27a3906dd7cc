#include "cdoqae/tranche.hpp"

#include <algorithm>
#include <cmath>

#include "cdoqae/error.hpp"

namespace cdoqae::pricing {

void Tranche::validate() const {
  require(!name.empty(), ErrorCode::kInvalidArgument, "tranche name must not be empty");
  require(lower >= 0, ErrorCode::kInvalidArgument, "tranche '" + name + "': lower must be >= 0");
  require(upper > lower, ErrorCode::kInvalidArgument,
          "tranche '" + name + "': upper must exceed lower");
}

double tranche_loss(double loss, const Tranche& tranche) {
  const auto lower = static_cast<double>(tranche.lower);
  return std::min(tranche.notional(), std::max(0.0, loss - lower));
}

void PiecewiseSpec::validate() const {
  const std::size_t n = breakpoints.size();
  require(n >= 1, ErrorCode::kInvalidArgument, "piecewise spec needs at least one breakpoint");
  require(slopes.size() == n && offsets.size() == n, ErrorCode::kInvalidArgument,
          "breakpoints, slopes and offsets must have equal length");
  require(breakpoints.front() == 0, ErrorCode::kInvalidArgument, "first breakpoint must be 0");
  require(f_max > f_min, ErrorCode::kInvalidArgument, "objective range requires f_max > f_min");
  require(c > 0.0 && c < 0.5, ErrorCode::kInvalidArgument, "scaling factor c must lie in (0, 0.5)");
  for (std::size_t k = 0; k < n; ++k) {
    require(std::isfinite(slopes[k]) && slopes[k] >= 0.0, ErrorCode::kInvalidArgument,
            "slopes must be finite and non-negative");
    if (k == 0) continue;
    require(breakpoints[k] > breakpoints[k - 1], ErrorCode::kInvalidArgument,
            "breakpoints must be strictly ascending");
    const double carried =
        offsets[k - 1] + slopes[k - 1] * static_cast<double>(breakpoints[k] - breakpoints[k - 1]);
    require(std::abs(carried - offsets[k]) <= 1e-12 * std::max(1.0, std::abs(carried)),
            ErrorCode::kInvalidArgument, "piecewise function must be continuous");
  }
}

double PiecewiseSpec::evaluate(double loss) const {
  std::size_t k = 0;
  while (k + 1 < breakpoints.size() && loss >= static_cast<double>(breakpoints[k + 1])) ++k;
  return offsets[k] + slopes[k] * (loss - static_cast<double>(breakpoints[k]));
}

PiecewiseSpec tranche_to_piecewise(const Tranche& tranche, std::int64_t max_loss, double c) {
  tranche.validate();
  PiecewiseSpec spec;
  spec.f_min = 0.0;
  spec.f_max = tranche.notional();
  spec.c = c;
  if (tranche.lower >= max_loss) {
    spec.breakpoints = {0};
    spec.slopes = {0.0};
    spec.offsets = {0.0};
    return spec;
  }
  if (tranche.lower > 0) {
    spec.breakpoints = {0, tranche.lower};
    spec.slopes = {0.0, 1.0};
    spec.offsets = {0.0, 0.0};
  } else {
    spec.breakpoints = {0};
    spec.slopes = {1.0};
    spec.offsets = {0.0};
  }
  if (tranche.upper < max_loss) {
    spec.breakpoints.push_back(tranche.upper);
    spec.slopes.push_back(0.0);
    spec.offsets.push_back(tranche.notional());
  }
  return spec;
}

}  // namespace cdoqae::pricing
