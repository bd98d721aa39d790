#include "cats/timeline.hpp"

#include <sstream>

namespace cats {

bool is_canonical(const SegmentTimeline& tl) {
  for (std::size_t i = 0; i < tl.segments.size(); ++i) {
    const Segment& s = tl.segments[i];
    if (s.start > s.end) return false;
    if (i > 0) {
      const Segment& p = tl.segments[i - 1];
      if (s.start <= p.end) return false;
      if (s.start == p.end + 1 && s.label == p.label) return false;
    }
  }
  return true;
}

void require_canonical(const SegmentTimeline& tl, const char* who) {
  if (!is_canonical(tl))
    throw ValueError(std::string(who) + ": timeline is not canonical: " + to_string(tl));
}

SegmentTimeline timeline_from_labels(const std::vector<int>& labels, int background) {
  SegmentTimeline tl;
  const Index n = static_cast<Index>(labels.size());
  Index t = 0;
  while (t < n) {
    const int lab = labels[static_cast<std::size_t>(t)];
    Index end = t;
    while (end + 1 < n && labels[static_cast<std::size_t>(end + 1)] == lab) ++end;
    if (lab != background) tl.segments.push_back({lab, t + 1, end + 1});
    t = end + 1;
  }
  return tl;
}

std::vector<int> labels_from_timeline(const SegmentTimeline& tl, Index frames, int background) {
  std::vector<int> out(static_cast<std::size_t>(frames), background);
  for (const Segment& s : tl.segments)
    for (Index t = s.start; t <= s.end && t <= frames; ++t)
      out[static_cast<std::size_t>(t - 1)] = s.label;
  return out;
}

std::string to_string(const SegmentTimeline& tl) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < tl.segments.size(); ++i) {
    const Segment& s = tl.segments[i];
    if (i) os << ' ';
    os << '(' << s.label << ',' << s.start << ',' << s.end << ')';
  }
  os << ']';
  return os.str();
}

}  // namespace cats
