#pragma once

// Segmental F1@k: a predicted segment is a true positive when its IoU with a
// same-label, not-yet-matched ground-truth segment reaches the threshold k.
// Matching is greedy in temporal order against the best-IoU candidate; an
// exhaustive oracle bounds the greedy procedure on small instances.

#include <array>
#include <map>
#include <string>
#include <vector>

#include "cats/timeline.hpp"

namespace cats {

// Intersection over union of two inclusive frame ranges, in [0, 1].
double iou(const Segment& a, const Segment& b);

struct MatchCounts {
  long long tp = 0, fp = 0, fn = 0;
  std::map<int, std::array<long long, 3>> per_class;  // label -> {tp, fp, fn}

  double precision() const;
  double recall() const;
  double f1() const;  // 2pr/(p+r), 0 when p + r == 0
};

// Greedy segmental matching at threshold k in (0, 1).
MatchCounts f1_at_k(const SegmentTimeline& pred, const SegmentTimeline& gt, double k);

// Exhaustive maximum one-to-one matching; |pred| and |gt| must be <= 12.
// Used to bound and sanity-check the greedy procedure.
MatchCounts f1_oracle(const SegmentTimeline& pred, const SegmentTimeline& gt, double k);

struct ThresholdCounts {
  double k = 0;
  MatchCounts counts;

  void add(const MatchCounts& m);
};

// Scores for one or more cross-validation folds at a common threshold set.
// F1 values are carried in percent, matching the usual "71.3 +/- 5.0"
// presentation; stddev is the population deviation across folds.
struct F1Report {
  struct Fold {
    int index = 0;
    std::vector<ThresholdCounts> at;  // one per threshold
  };

  std::vector<double> thresholds;
  std::vector<Fold> folds;

  double fold_f1(std::size_t fold, std::size_t ti) const;  // percent
  double mean_f1(std::size_t ti) const;
  double stddev_f1(std::size_t ti) const;
  MatchCounts pooled(std::size_t ti) const;

  std::string table(const std::string& title) const;
  std::string records() const;  // line-delimited JSON, one per fold per threshold
};

F1Report aggregate_folds(const std::vector<F1Report>& reports);

std::string format_mean_std(double mean_pct, double std_pct);  // "71.3 ± 5.0"

inline const std::vector<double>& standard_thresholds() {
  static const std::vector<double> ks = {0.10, 0.25, 0.50};
  return ks;
}

}  // namespace cats
