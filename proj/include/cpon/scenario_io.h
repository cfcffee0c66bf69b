#ifndef CPON_SCENARIO_IO_H_
#define CPON_SCENARIO_IO_H_

// Scenario files: one `key = value` per line, `#` starts a comment, lists
// are comma separated, dimensioned values carry a unit.
//
//   C = 10 Gb/s            C_c = 2 Gb/s           J = 32
//   tau = 96 us            Gamma = 2 ms           t_g = 5 us
//   report_size = 64 B
//   b = 52 Mb/s, 156 Mb/s, 624 Mb/s
//   p = 0.5, 0.3, 0.2
//   packet_sizes = 64 B, 1518 B
//   packet_probs = 0.6, 0.4
//   chi = 0.4  | lambda_c = 100 1/s
//   pi = 0.7   | lambda_p = 1e6 1/s
//   holding = 0.5 s | mu = 2 1/s
//   low_traffic_polling = off
//   excess_bound_factor = 2
//   eta = zero | expected | all | <number>
//   replications = 10      seed = 1
//   duration = 200 s       warmup = 20 s
//   sweep.chi = 0.1, 0.4, 0.7
//   sweep.C_c = 2 Gb/s, 4 Gb/s
//   sweep.holding = 0.02 s, 0.5 s
//   sweep.pi = 0.1, 0.5
//   sweep.low_traffic_polling = off, on
//   outputs = blocking-table, delay-curve, jitter-report, stability-report
//
// Units: b/s kb/s Mb/s Gb/s (also bps Kbps Mbps Gbps); s ms us µs ns;
// B bit; 1/s Hz. Unset keys keep their defaults.

#include <filesystem>
#include <string>
#include <string_view>

#include "cpon/experiment.h"

namespace cpon {

// Throws ParseError (with line number) on malformed input and
// InvalidArgument when the resulting spec violates an invariant.
ExperimentSpec ParseScenario(std::string_view text);

ExperimentSpec LoadScenario(const std::filesystem::path& path);

// Lossless text form; ParseScenario(RenderScenario(s)) == s.
std::string RenderScenario(const ExperimentSpec& spec);

}  // namespace cpon

#endif  // CPON_SCENARIO_IO_H_
