#include "rlcf/metrics/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "rlcf/core/error.hpp"

namespace rlcf {

double proximity(const Image &a, const Image &b) {
  require_same_shape(a, b, "proximity");
  std::uint64_t l1 = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i)
    l1 += static_cast<std::uint64_t>(std::abs(int(a.pixels[i]) - int(b.pixels[i])));
  return 1.0 - static_cast<double>(l1) / (255.0 * static_cast<double>(a.pixels.size()));
}

double sparsity(const Image &a, const Image &b) {
  require_same_shape(a, b, "sparsity");
  std::uint64_t l0 = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i)
    l0 += a.pixels[i] != b.pixels[i];
  return 1.0 - static_cast<double>(l0) / static_cast<double>(a.pixels.size());
}

double validity(std::span<const SampleMetrics> samples) {
  if (samples.empty())
    throw std::invalid_argument("validity of an empty result list");
  std::size_t valid = 0;
  for (const auto &s : samples)
    valid += s.valid;
  return static_cast<double>(valid) / static_cast<double>(samples.size());
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty())
    throw std::invalid_argument("mean of an empty list");
  const auto n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values)
    sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : values)
    ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / n)};
}

MetricsReport aggregate(std::span<const SampleMetrics> samples,
                        const std::string &agent_id, const std::string &approach) {
  if (samples.empty())
    throw std::invalid_argument("aggregate over an empty sample list");
  std::vector<double> prox, spars, secs;
  MetricsReport r;
  for (const auto &s : samples) {
    prox.push_back(s.proximity);
    spars.push_back(s.sparsity);
    secs.push_back(s.generation_seconds);
    r.valid_count += s.valid;
  }
  r.agent_id = agent_id;
  r.approach = approach;
  r.n = static_cast<std::int64_t>(samples.size());
  r.validity = static_cast<double>(r.valid_count) / static_cast<double>(r.n);
  r.proximity = mean_std(prox);
  r.sparsity = mean_std(spars);
  r.generation_seconds = mean_std(secs);
  r.machine = machine_fingerprint();
  return r;
}

std::string render_table(std::span<const MetricsReport> reports) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %-14s %6s %10s %17s %17s %19s\n", "Agent",
                "Approach", "N", "Validity", "Proximity", "Sparsity", "Gen. Time [s]");
  out += line;
  out += std::string(101, '-') + '\n';
  for (const auto &r : reports) {
    std::snprintf(line, sizeof line,
                  "%-12s %-14s %6lld %10.3f %8.3f +- %5.3f %8.3f +- %5.3f %9.4f +- %6.4f\n",
                  r.agent_id.c_str(), r.approach.c_str(), static_cast<long long>(r.n),
                  r.validity, r.proximity.mean, r.proximity.std, r.sparsity.mean,
                  r.sparsity.std, r.generation_seconds.mean, r.generation_seconds.std);
    out += line;
  }
  return out;
}

namespace {

nlohmann::json ms_json(const MeanStd &m) { return {{"mean", m.mean}, {"std", m.std}}; }
MeanStd ms_from(const nlohmann::json &j) {
  return {j.at("mean").get<double>(), j.at("std").get<double>()};
}

} // namespace

nlohmann::json to_json(const MetricsReport &r) {
  return {{"agent_id", r.agent_id},
          {"approach", r.approach},
          {"n", r.n},
          {"valid_count", r.valid_count},
          {"validity", r.validity},
          {"proximity", ms_json(r.proximity)},
          {"sparsity", ms_json(r.sparsity)},
          {"generation_seconds", ms_json(r.generation_seconds)},
          {"std_kind", "population"},
          {"machine", r.machine}};
}

MetricsReport report_from_json(const nlohmann::json &j) {
  try {
    MetricsReport r;
    r.agent_id = j.at("agent_id").get<std::string>();
    r.approach = j.at("approach").get<std::string>();
    r.n = j.at("n").get<std::int64_t>();
    r.valid_count = j.at("valid_count").get<std::int64_t>();
    r.validity = j.at("validity").get<double>();
    r.proximity = ms_from(j.at("proximity"));
    r.sparsity = ms_from(j.at("sparsity"));
    r.generation_seconds = ms_from(j.at("generation_seconds"));
    r.machine = j.value("machine", "");
    return r;
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError("report", e.what());
  }
}

std::string machine_fingerprint() {
  std::string cpu = "unknown cpu";
  std::ifstream info("/proc/cpuinfo");
  for (std::string line; std::getline(info, line);) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos && colon + 2 <= line.size())
        cpu = line.substr(colon + 2);
      break;
    }
  }
  std::string compiler;
#if defined(__clang__)
  compiler = "clang " __clang_version__;
#elif defined(__GNUC__)
  compiler = "gcc " __VERSION__;
#else
  compiler = "unknown compiler";
#endif
  return cpu + "; " + std::to_string(std::thread::hardware_concurrency()) +
         " threads; " + compiler;
}

} // namespace rlcf
