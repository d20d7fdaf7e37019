#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rlcf/core/image.hpp"

namespace rlcf {

// Per-counterfactual measurements.
struct SampleMetrics {
  bool valid = false;
  double proximity = 0.0;
  double sparsity = 0.0;
  double generation_seconds = 0.0;
};

// 1 - L1(a, b) / (255 * 3 * W * H). Both images are 8-bit RGB.
double proximity(const Image &a, const Image &b);
// 1 - L0(a, b) / (3 * W * H), counting channel entries that differ.
double sparsity(const Image &a, const Image &b);

// Fraction of valid samples; throws on an empty list.
double validity(std::span<const SampleMetrics> samples);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0; // population standard deviation
};

MeanStd mean_std(std::span<const double> values);

struct MetricsReport {
  std::string agent_id;
  std::string approach;
  std::int64_t n = 0;
  std::int64_t valid_count = 0;
  double validity = 0.0;
  MeanStd proximity;
  MeanStd sparsity;
  MeanStd generation_seconds;
  std::string machine;
};

MetricsReport aggregate(std::span<const SampleMetrics> samples,
                        const std::string &agent_id, const std::string &approach);

// Fixed-width table with one row per report.
std::string render_table(std::span<const MetricsReport> reports);

nlohmann::json to_json(const MetricsReport &r);
MetricsReport report_from_json(const nlohmann::json &j);

// CPU model, core count and compiler of the running binary. Timing numbers
// are only comparable between reports with the same fingerprint.
std::string machine_fingerprint();

} // namespace rlcf
