// Hand-built models whose prediction is read straight off one feature.
#pragma once

#include <string>
#include <vector>

#include "nsd/detector.hpp"
#include "nsd/gbdt.hpp"

namespace fixture {

/// Predicts class round(x[feature]) (clamped into range) with high confidence.
inline nsd::GbdtModel selector_model(std::vector<std::string> labels, std::size_t feature_count, int feature) {
  nsd::GbdtModel m;
  m.n_classes = static_cast<int>(labels.size());
  m.class_labels = std::move(labels);
  m.feature_count = feature_count;
  std::vector<nsd::Tree> round;
  const int k = m.n_classes;
  for (int c = 0; c < k; ++c) {
    nsd::Tree t;
    // x < c - 0.5 -> 0; else x < c + 0.5 -> 10; else 0. Edge classes absorb out-of-range values.
    double lo = c == 0 ? -1e300 : c - 0.5;
    double hi = c == k - 1 ? 1e300 : c + 0.5;
    t.nodes.resize(5);
    t.nodes[0] = {feature, lo, 1, 2, 0.0, 1.0};
    t.nodes[1] = {-1, 0.0, -1, -1, 0.0, 0.0};
    t.nodes[2] = {feature, hi, 3, 4, 0.0, 1.0};
    t.nodes[3] = {-1, 0.0, -1, -1, 10.0, 0.0};
    t.nodes[4] = {-1, 0.0, -1, -1, 0.0, 0.0};
    round.push_back(t);
  }
  m.rounds.push_back(round);
  m.train_log_loss = {0.0};
  return m;
}

/// L1 class from feature 0, L2 class from feature 1 of a 60-value window.
inline nsd::DetectorBundle selector_bundle(std::size_t feature_count = 60) {
  nsd::DetectorBundle b;
  b.l1 = selector_model(nsd::l1_class_order(), feature_count, 0);
  b.l2_rt = selector_model(nsd::rt_class_order(), feature_count, 1);
  b.l2_nrt = selector_model(nsd::nrt_class_order(), feature_count, 1);
  return b;
}

inline std::vector<double> window(double l1, double l2, std::size_t n = 60) {
  std::vector<double> v(n, 0.0);
  v[0] = l1;
  v[1] = l2;
  return v;
}

}  // namespace fixture
