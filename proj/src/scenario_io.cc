#include "cpon/scenario_io.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "cpon/error.h"

namespace cpon {
namespace {

enum class Dim { kNone, kRate, kTime, kSize, kFrequency };

struct UnitScale {
  std::string_view name;
  Dim dim;
  double scale;
};

constexpr UnitScale kUnits[] = {
    {"b/s", Dim::kRate, 1.0},      {"bit/s", Dim::kRate, 1.0},   {"bps", Dim::kRate, 1.0},
    {"kb/s", Dim::kRate, 1e3},     {"Kbps", Dim::kRate, 1e3},    {"kbps", Dim::kRate, 1e3},
    {"Mb/s", Dim::kRate, 1e6},     {"Mbps", Dim::kRate, 1e6},    {"Gb/s", Dim::kRate, 1e9},
    {"Gbps", Dim::kRate, 1e9},     {"s", Dim::kTime, 1.0},       {"ms", Dim::kTime, 1e-3},
    {"us", Dim::kTime, 1e-6},      {"\xC2\xB5s", Dim::kTime, 1e-6}, {"ns", Dim::kTime, 1e-9},
    {"B", Dim::kSize, 8.0},        {"bit", Dim::kSize, 1.0},     {"bits", Dim::kSize, 1.0},
    {"1/s", Dim::kFrequency, 1.0}, {"Hz", Dim::kFrequency, 1.0},
};

const char* DimName(Dim d) {
  switch (d) {
    case Dim::kRate: return "a rate (e.g. Gb/s)";
    case Dim::kTime: return "a duration (e.g. ms)";
    case Dim::kSize: return "a size (B or bit)";
    case Dim::kFrequency: return "a frequency (1/s)";
    case Dim::kNone: break;
  }
  return "a plain number";
}

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> SplitList(std::string_view s) {
  std::vector<std::string_view> items;
  size_t pos = 0;
  while (true) {
    const size_t comma = s.find(',', pos);
    items.push_back(Trim(s.substr(pos, comma == std::string_view::npos ? s.npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return items;
}

class LineParser {
 public:
  explicit LineParser(int line) : line_(line) {}

  [[noreturn]] void Fail(const std::string& what) const { throw ParseError(line_, what); }

  double Number(std::string_view item, Dim dim) const {
    item = Trim(item);
    double value = 0.0;
    const char* begin = item.data();
    const char* end = item.data() + item.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr == begin) Fail("expected a number, got '" + std::string(item) + "'");
    const std::string_view unit = Trim(std::string_view(ptr, end - ptr));
    if (unit.empty()) {
      if (dim != Dim::kNone) Fail("'" + std::string(item) + "' needs a unit: " + DimName(dim));
      return value;
    }
    for (const UnitScale& u : kUnits) {
      if (u.name == unit) {
        if (u.dim != dim) Fail("unit '" + std::string(unit) + "' is not " + DimName(dim));
        return value * u.scale;
      }
    }
    Fail("unknown unit '" + std::string(unit) + "'");
  }

  std::vector<double> Numbers(std::string_view value, Dim dim) const {
    std::vector<double> out;
    for (std::string_view item : SplitList(value)) {
      if (item.empty()) Fail("empty list item");
      out.push_back(Number(item, dim));
    }
    return out;
  }

  bool Flag(std::string_view item) const {
    item = Trim(item);
    if (item == "on" || item == "true" || item == "1" || item == "yes") return true;
    if (item == "off" || item == "false" || item == "0" || item == "no") return false;
    Fail("expected on/off, got '" + std::string(item) + "'");
  }

  int64_t Integer(std::string_view item, int64_t min) const {
    item = Trim(item);
    int64_t v = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      Fail("expected an integer, got '" + std::string(item) + "'");
    }
    if (v < min) Fail("value must be at least " + std::to_string(min));
    return v;
  }

  uint64_t Unsigned(std::string_view item) const {
    item = Trim(item);
    uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      Fail("expected an unsigned integer, got '" + std::string(item) + "'");
    }
    return v;
  }

 private:
  int line_;
};

// Values whose effect depends on other keys; applied once every line is read.
struct Deferred {
  std::optional<std::vector<double>> rates;
  std::optional<std::vector<double>> probs;
  int probs_line = 0;
  std::optional<std::vector<double>> packet_sizes;
  std::optional<std::vector<double>> packet_probs;
  int packet_line = 0;
  std::optional<double> chi, lambda_c, pi, lambda_p, holding, mu;
};

Dim SweepDim(SweepParam p) {
  switch (p) {
    case SweepParam::kCircuitLimit: return Dim::kRate;
    case SweepParam::kHoldingTime: return Dim::kTime;
    default: return Dim::kNone;
  }
}

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string NumList(const std::vector<double>& values, const char* unit) {
  std::string out;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += Num(values[i]);
    if (*unit) out += std::string(" ") + unit;
  }
  return out;
}

}  // namespace

ExperimentSpec ParseScenario(std::string_view text) {
  ExperimentSpec spec;
  Deferred d;
  std::set<std::string> seen;

  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    const size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = Trim(line);
    if (line.empty()) continue;

    const LineParser p(line_no);
    const size_t eq = line.find('=');
    if (eq == std::string_view::npos) p.Fail("expected 'key = value'");
    const std::string key(Trim(line.substr(0, eq)));
    const std::string_view value = Trim(line.substr(eq + 1));
    if (key.empty()) p.Fail("missing key");
    if (value.empty()) p.Fail("missing value for '" + key + "'");
    if (!seen.insert(key).second) p.Fail("duplicate key '" + key + "'");

    ScenarioConfig& c = spec.base;
    if (key == "C") {
      c.channel_rate = p.Number(value, Dim::kRate);
    } else if (key == "C_c") {
      c.circuit_limit = p.Number(value, Dim::kRate);
    } else if (key == "J") {
      c.onus = static_cast<int>(p.Integer(value, 1));
    } else if (key == "tau") {
      c.propagation_delay = p.Number(value, Dim::kTime);
    } else if (key == "Gamma") {
      c.cycle = p.Number(value, Dim::kTime);
    } else if (key == "t_g") {
      c.guard_time = p.Number(value, Dim::kTime);
    } else if (key == "report_size") {
      c.report_bits = p.Number(value, Dim::kSize);
    } else if (key == "b") {
      d.rates = p.Numbers(value, Dim::kRate);
      d.probs_line = std::max(d.probs_line, line_no);
    } else if (key == "p") {
      d.probs = p.Numbers(value, Dim::kNone);
      d.probs_line = std::max(d.probs_line, line_no);
    } else if (key == "packet_sizes") {
      d.packet_sizes = p.Numbers(value, Dim::kSize);
      d.packet_line = std::max(d.packet_line, line_no);
    } else if (key == "packet_probs") {
      d.packet_probs = p.Numbers(value, Dim::kNone);
      d.packet_line = std::max(d.packet_line, line_no);
    } else if (key == "chi") {
      d.chi = p.Number(value, Dim::kNone);
    } else if (key == "lambda_c") {
      d.lambda_c = p.Number(value, Dim::kFrequency);
    } else if (key == "pi") {
      d.pi = p.Number(value, Dim::kNone);
    } else if (key == "lambda_p") {
      d.lambda_p = p.Number(value, Dim::kFrequency);
    } else if (key == "holding") {
      d.holding = p.Number(value, Dim::kTime);
    } else if (key == "mu") {
      d.mu = p.Number(value, Dim::kFrequency);
    } else if (key == "low_traffic_polling") {
      c.low_traffic_polling = p.Flag(value);
    } else if (key == "excess_bound_factor") {
      c.excess_bound_factor = p.Number(value, Dim::kNone);
    } else if (key == "eta") {
      try {
        spec.eta = EtaPolicy::Parse(std::string(value));
      } catch (const InvalidArgument& e) {
        p.Fail(e.what());
      }
    } else if (key == "replications") {
      spec.replications = static_cast<int>(p.Integer(value, 0));
    } else if (key == "seed") {
      spec.seed = p.Unsigned(value);
    } else if (key == "duration") {
      spec.duration = p.Number(value, Dim::kTime);
    } else if (key == "warmup") {
      spec.warmup = p.Number(value, Dim::kTime);
    } else if (key == "outputs") {
      for (std::string_view item : SplitList(value)) {
        const auto o = ParseOutput(std::string(item));
        if (!o) p.Fail("unknown output '" + std::string(item) + "'");
        if (std::find(spec.outputs.begin(), spec.outputs.end(), *o) != spec.outputs.end()) {
          p.Fail("output '" + std::string(item) + "' listed twice");
        }
        spec.outputs.push_back(*o);
      }
    } else if (key.rfind("sweep.", 0) == 0) {
      const auto param = ParseSweepParam(key.substr(6));
      if (!param) p.Fail("unknown sweep parameter '" + key.substr(6) + "'");
      Sweep s{*param, {}};
      if (*param == SweepParam::kLowTrafficPolling) {
        for (std::string_view item : SplitList(value)) s.values.push_back(p.Flag(item) ? 1.0 : 0.0);
      } else {
        s.values = p.Numbers(value, SweepDim(*param));
      }
      spec.sweeps.push_back(std::move(s));
    } else {
      p.Fail("unknown key '" + key + "'");
    }
  }

  ScenarioConfig& c = spec.base;
  if (d.rates || d.probs) {
    try {
      c.classes = CircuitClassSet(d.rates.value_or(c.classes.rates()),
                                  d.probs.value_or(c.classes.probabilities()));
    } catch (const InvalidArgument& e) {
      throw ParseError(d.probs_line, e.what());
    }
  }
  if (d.packet_sizes || d.packet_probs) {
    std::vector<double> sizes, probs;
    for (const auto& e : c.packet_sizes.entries()) {
      sizes.push_back(e.size_bits);
      probs.push_back(e.probability);
    }
    if (d.packet_sizes) sizes = *d.packet_sizes;
    if (d.packet_probs) probs = *d.packet_probs;
    if (sizes.size() != probs.size()) {
      throw ParseError(d.packet_line, "packet_sizes and packet_probs differ in length");
    }
    std::vector<PacketSizeDistribution::Entry> entries;
    for (size_t i = 0; i < sizes.size(); ++i) entries.push_back({sizes[i], probs[i]});
    try {
      c.packet_sizes = PacketSizeDistribution(std::move(entries));
    } catch (const InvalidArgument& e) {
      throw ParseError(d.packet_line, e.what());
    }
  }

  if (d.holding && d.mu) throw ParseError(0, "give either holding or mu, not both");
  if (d.chi && d.lambda_c) throw ParseError(0, "give either chi or lambda_c, not both");
  if (d.pi && d.lambda_p) throw ParseError(0, "give either pi or lambda_p, not both");
  if (d.holding) {
    if (!(*d.holding > 0.0)) throw InvalidArgument("holding time must be positive");
    c.departure_rate = 1.0 / *d.holding;
  }
  if (d.mu) c.departure_rate = *d.mu;
  if (d.lambda_c) c.circuit_request_rate = *d.lambda_c;
  if (d.lambda_p) c.packet_rate = *d.lambda_p;
  if (d.chi) c.SetCircuitLoad(*d.chi);
  if (d.pi) c.SetPacketLoad(*d.pi);

  spec.Validate();
  return spec;
}

ExperimentSpec LoadScenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot read scenario file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return ParseScenario(text.str());
}

std::string RenderScenario(const ExperimentSpec& spec) {
  const ScenarioConfig& c = spec.base;
  std::ostringstream out;
  out << "C = " << Num(c.channel_rate) << " b/s\n";
  out << "C_c = " << Num(c.circuit_limit) << " b/s\n";
  out << "J = " << c.onus << "\n";
  out << "tau = " << Num(c.propagation_delay) << " s\n";
  out << "Gamma = " << Num(c.cycle) << " s\n";
  out << "t_g = " << Num(c.guard_time) << " s\n";
  out << "report_size = " << Num(c.report_bits) << " bit\n";
  out << "b = " << NumList(c.classes.rates(), "b/s") << "\n";
  out << "p = " << NumList(c.classes.probabilities(), "") << "\n";
  std::vector<double> sizes, probs;
  for (const auto& e : c.packet_sizes.entries()) {
    sizes.push_back(e.size_bits);
    probs.push_back(e.probability);
  }
  out << "packet_sizes = " << NumList(sizes, "bit") << "\n";
  out << "packet_probs = " << NumList(probs, "") << "\n";
  out << "lambda_c = " << Num(c.circuit_request_rate) << " 1/s\n";
  out << "lambda_p = " << Num(c.packet_rate) << " 1/s\n";
  out << "mu = " << Num(c.departure_rate) << " 1/s\n";
  out << "low_traffic_polling = " << (c.low_traffic_polling ? "on" : "off") << "\n";
  out << "excess_bound_factor = " << Num(c.excess_bound_factor) << "\n";
  out << "eta = " << spec.eta.ToString() << "\n";
  out << "replications = " << spec.replications << "\n";
  out << "seed = " << spec.seed << "\n";
  out << "duration = " << Num(spec.duration) << " s\n";
  if (spec.warmup >= 0.0) out << "warmup = " << Num(spec.warmup) << " s\n";
  for (const Sweep& s : spec.sweeps) {
    out << "sweep." << SweepParamName(s.param) << " = ";
    if (s.param == SweepParam::kLowTrafficPolling) {
      for (size_t i = 0; i < s.values.size(); ++i) {
        out << (i ? ", " : "") << (s.values[i] != 0.0 ? "on" : "off");
      }
    } else {
      const SweepParam p = s.param;
      out << NumList(s.values, p == SweepParam::kCircuitLimit  ? "b/s"
                               : p == SweepParam::kHoldingTime ? "s"
                                                               : "");
    }
    out << "\n";
  }
  if (!spec.outputs.empty()) {
    out << "outputs = ";
    for (size_t i = 0; i < spec.outputs.size(); ++i) {
      out << (i ? ", " : "") << OutputName(spec.outputs[i]);
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace cpon
