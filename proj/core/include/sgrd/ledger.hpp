#pragma once

namespace sgrd {

// Running count of supervision consumed: two labels per collected triplet,
// one query per ground-truth simulator check (the sparse baseline's success
// probe). Reinforcement-learning steps with intrinsic rewards charge
// nothing. Counts never decrease.
struct LabelLedger {
  long long triplet_labels = 0;
  long long queries = 0;

  void charge_triplet() { triplet_labels += 2; }
  void charge_query() { queries += 1; }
  long long total() const { return triplet_labels + queries; }
};

}  // namespace sgrd
