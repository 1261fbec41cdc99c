#pragma once

#include <span>

namespace rtfs {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// y = intercept + slope x by ordinary least squares. Throws EstimationError
/// when x has no spread or fewer than two points are supplied.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

} // namespace rtfs
