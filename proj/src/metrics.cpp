#include "cats/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include <json.hpp>

namespace cats {

double iou(const Segment& a, const Segment& b) {
  const Index inter = std::min(a.end, b.end) - std::max(a.start, b.start) + 1;
  if (inter <= 0) return 0.0;
  const Index uni = a.length() + b.length() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double MatchCounts::precision() const {
  return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double MatchCounts::recall() const {
  return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double MatchCounts::f1() const {
  const double p = precision(), r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

namespace {

void check_inputs(const SegmentTimeline& pred, const SegmentTimeline& gt, double k,
                  const char* who) {
  require_canonical(pred, who);
  require_canonical(gt, who);
  if (!(k > 0.0 && k < 1.0))
    throw ValueError(std::string(who) + ": threshold k must lie in (0,1)");
}

}  // namespace

MatchCounts f1_at_k(const SegmentTimeline& pred, const SegmentTimeline& gt, double k) {
  check_inputs(pred, gt, k, "f1_at_k");
  MatchCounts m;
  std::vector<bool> matched(gt.size(), false);
  for (const Segment& p : pred.segments) {
    // Best-IoU same-label candidate, matched or not; ties toward the earlier
    // ground-truth segment.
    double best = -1.0;
    std::size_t best_j = gt.size();
    for (std::size_t j = 0; j < gt.size(); ++j) {
      if (gt[j].label != p.label) continue;
      const double v = iou(p, gt[j]);
      if (v > best) {
        best = v;
        best_j = j;
      }
    }
    if (best_j < gt.size() && best >= k && !matched[best_j]) {
      matched[best_j] = true;
      ++m.tp;
      ++m.per_class[p.label][0];
    } else {
      ++m.fp;
      ++m.per_class[p.label][1];
    }
  }
  for (std::size_t j = 0; j < gt.size(); ++j)
    if (!matched[j]) {
      ++m.fn;
      ++m.per_class[gt[j].label][2];
    }
  return m;
}

MatchCounts f1_oracle(const SegmentTimeline& pred, const SegmentTimeline& gt, double k) {
  check_inputs(pred, gt, k, "f1_oracle");
  if (pred.size() > 12 || gt.size() > 12)
    throw ValueError("f1_oracle: instance too large (limit 12 segments per side)");

  // Candidate edges: same label, IoU >= k.
  const std::size_t np = pred.size(), ng = gt.size();
  std::vector<std::vector<std::size_t>> cand(np);
  for (std::size_t i = 0; i < np; ++i)
    for (std::size_t j = 0; j < ng; ++j)
      if (pred[i].label == gt[j].label && iou(pred[i], gt[j]) >= k) cand[i].push_back(j);

  std::vector<std::vector<int>> memo(np + 1, std::vector<int>(std::size_t(1) << ng, -1));
  std::function<int(std::size_t, unsigned)> best = [&](std::size_t i, unsigned used) -> int {
    if (i == np) return 0;
    int& slot = memo[i][used];
    if (slot >= 0) return slot;
    int r = best(i + 1, used);  // leave pred i unmatched
    for (std::size_t j : cand[i])
      if (!(used >> j & 1u)) r = std::max(r, 1 + best(i + 1, used | (1u << j)));
    return slot = r;
  };
  const long long tp = ng == 0 ? 0 : best(0, 0);
  MatchCounts m;
  m.tp = tp;
  m.fp = static_cast<long long>(np) - tp;
  m.fn = static_cast<long long>(ng) - tp;
  return m;
}

void ThresholdCounts::add(const MatchCounts& m) {
  counts.tp += m.tp;
  counts.fp += m.fp;
  counts.fn += m.fn;
  for (const auto& [label, c] : m.per_class) {
    auto& slot = counts.per_class[label];
    slot[0] += c[0];
    slot[1] += c[1];
    slot[2] += c[2];
  }
}

double F1Report::fold_f1(std::size_t fold, std::size_t ti) const {
  return 100.0 * folds[fold].at[ti].counts.f1();
}

double F1Report::mean_f1(std::size_t ti) const {
  if (folds.empty()) return 0.0;
  double s = 0;
  for (std::size_t f = 0; f < folds.size(); ++f) s += fold_f1(f, ti);
  return s / static_cast<double>(folds.size());
}

double F1Report::stddev_f1(std::size_t ti) const {
  if (folds.empty()) return 0.0;
  const double mu = mean_f1(ti);
  double s = 0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const double d = fold_f1(f, ti) - mu;
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(folds.size()));
}

MatchCounts F1Report::pooled(std::size_t ti) const {
  ThresholdCounts acc;
  for (const Fold& f : folds) acc.add(f.at[ti].counts);
  return acc.counts;
}

std::string format_mean_std(double mean_pct, double std_pct) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f ± %.1f", mean_pct, std_pct);
  return buf;
}

std::string F1Report::table(const std::string& title) const {
  std::ostringstream os;
  os << title << "\n";
  os << "              ";
  for (double k : thresholds) {
    char head[32];
    std::snprintf(head, sizeof(head), "F1@%-11.0f", k * 100);
    os << head;
  }
  os << "\n";
  os << "  aggregate   ";
  for (std::size_t ti = 0; ti < thresholds.size(); ++ti) {
    char cell[48];
    std::snprintf(cell, sizeof(cell), "%-14s", format_mean_std(mean_f1(ti), stddev_f1(ti)).c_str());
    os << cell;
  }
  os << "\n";
  for (const Fold& f : folds) {
    char row[48];
    std::snprintf(row, sizeof(row), "  fold %-6d ", f.index);
    os << row;
    for (std::size_t ti = 0; ti < thresholds.size(); ++ti) {
      char cell[48];
      std::snprintf(cell, sizeof(cell), "%-14.1f", 100.0 * f.at[ti].counts.f1());
      os << cell;
    }
    os << "\n";
  }
  return os.str();
}

std::string F1Report::records() const {
  std::ostringstream os;
  for (const Fold& f : folds)
    for (std::size_t ti = 0; ti < thresholds.size(); ++ti) {
      const MatchCounts& c = f.at[ti].counts;
      nlohmann::json rec = {
          {"fold", f.index},       {"k", thresholds[ti]},    {"tp", c.tp},
          {"fp", c.fp},            {"fn", c.fn},             {"precision", c.precision()},
          {"recall", c.recall()},  {"f1", 100.0 * c.f1()},
      };
      nlohmann::json per_class = nlohmann::json::object();
      for (const auto& [label, counts] : c.per_class)
        per_class[std::to_string(label)] = {{"tp", counts[0]}, {"fp", counts[1]}, {"fn", counts[2]}};
      rec["per_class"] = std::move(per_class);
      os << rec.dump() << "\n";
    }
  return os.str();
}

F1Report aggregate_folds(const std::vector<F1Report>& reports) {
  if (reports.empty()) throw ValueError("aggregate_folds: empty report list");
  F1Report out;
  out.thresholds = reports[0].thresholds;
  for (const F1Report& r : reports) {
    if (r.thresholds != out.thresholds)
      throw ValueError("aggregate_folds: reports have mismatched thresholds");
    for (const F1Report::Fold& f : r.folds) out.folds.push_back(f);
  }
  return out;
}

}  // namespace cats
