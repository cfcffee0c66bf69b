#include "cpon/stats.h"

#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "cpon/error.h"

namespace cpon {

double RunningStats::stddev() const { return std::sqrt(variance()); }

Interval ConfidenceInterval(std::span<const double> samples, double level) {
  if (samples.size() < 2) {
    throw InvalidArgument("a confidence interval needs at least two replications");
  }
  if (!(level >= 0.0 && level < 1.0)) throw InvalidArgument("confidence level must be in [0, 1)");
  RunningStats s;
  for (double x : samples) s.Add(x);
  Interval out{s.mean(), 0.0};
  if (level == 0.0) return out;
  const boost::math::students_t dist(static_cast<double>(samples.size() - 1));
  const double t = boost::math::quantile(dist, 0.5 + level / 2.0);
  out.halfwidth = t * s.stddev() / std::sqrt(static_cast<double>(samples.size()));
  return out;
}

}  // namespace cpon
