#ifndef CPON_STATS_H_
#define CPON_STATS_H_

#include <cstdint>
#include <span>

namespace cpon {

// Welford accumulator.
class RunningStats {
 public:
  void Add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  int64_t count() const { return n_; }
  double mean() const { return mean_; }
  // Sample variance; 0 with fewer than two samples.
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double stddev() const;

 private:
  int64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct Interval {
  double mean = 0.0;
  double halfwidth = 0.0;
  double lower() const { return mean - halfwidth; }
  double upper() const { return mean + halfwidth; }
  bool Contains(double x) const { return x >= lower() && x <= upper(); }
};

// Two-sided Student-t interval over independent replication means. Throws
// InvalidArgument with fewer than two samples or a level outside [0, 1).
Interval ConfidenceInterval(std::span<const double> samples, double level = 0.90);

}  // namespace cpon

#endif  // CPON_STATS_H_
