#pragma once

// Scalar reference versions of the GAN loss terms. Inputs are plain nested
// vectors so nothing here touches the tensor library.

#include <cmath>
#include <functional>
#include <vector>

namespace rlcf::oracle {

using Matrix = std::vector<std::vector<double>>;

// mean_i -log softmax(logits_i)[label_i], with a max-shifted log-sum-exp.
inline double cross_entropy(const Matrix &logits, const std::vector<int> &labels) {
  double total = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    double m = logits[i][0];
    for (double v : logits[i])
      m = std::max(m, v);
    double z = 0;
    for (double v : logits[i])
      z += std::exp(v - m);
    total += -(logits[i][static_cast<std::size_t>(labels[i])] - m - std::log(z));
  }
  return total / static_cast<double>(logits.size());
}

inline double mean_abs_diff(const std::vector<double> &a, const std::vector<double> &b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += std::fabs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

inline double adversarial(const std::vector<double> &real, const std::vector<double> &fake,
                          double gp, double lambda_gp) {
  double r = 0, f = 0;
  for (double v : real)
    r += v;
  for (double v : fake)
    f += v;
  return r / static_cast<double>(real.size()) - f / static_cast<double>(fake.size()) -
         lambda_gp * gp;
}

// Gradient penalty of a scalar critic over a batch of flattened inputs,
// using central differences for every input coordinate.
inline double gradient_penalty_fd(const std::function<double(const std::vector<double> &)> &critic,
                                  const Matrix &points, double h = 1e-5) {
  double total = 0;
  for (const auto &p : points) {
    double sq = 0;
    std::vector<double> x = p;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double keep = x[j];
      x[j] = keep + h;
      const double up = critic(x);
      x[j] = keep - h;
      const double down = critic(x);
      x[j] = keep;
      const double g = (up - down) / (2 * h);
      sq += g * g;
    }
    total += (std::sqrt(sq) - 1) * (std::sqrt(sq) - 1);
  }
  return total / static_cast<double>(points.size());
}

inline double relative_error(double a, double b) {
  const double scale = std::max({std::fabs(a), std::fabs(b), 1e-12});
  return std::fabs(a - b) / scale;
}

} // namespace rlcf::oracle
