#pragma once

// Labeled segment timelines over a frame range. Frames are 1-based and
// bounds are inclusive, matching how annotation spans are usually written.

#include <cstdint>
#include <string>
#include <vector>

#include "cats/tensor.hpp"

namespace cats {

struct Segment {
  int label = 0;
  Index start = 1;  // inclusive
  Index end = 1;    // inclusive

  Index length() const { return end - start + 1; }
  bool operator==(const Segment&) const = default;
};

struct SegmentTimeline {
  std::vector<Segment> segments;

  bool empty() const { return segments.empty(); }
  std::size_t size() const { return segments.size(); }
  const Segment& operator[](std::size_t i) const { return segments[i]; }
  bool operator==(const SegmentTimeline&) const = default;
};

// Canonical form: sorted, non-overlapping, start <= end, and no two
// back-to-back segments (end + 1 == next.start) share a label.
bool is_canonical(const SegmentTimeline& tl);
void require_canonical(const SegmentTimeline& tl, const char* who);

// Run-length encodes a frame-wise label track into a timeline. Frames whose
// label equals `background` are skipped (no segment is emitted for them).
SegmentTimeline timeline_from_labels(const std::vector<int>& labels, int background = -1);

// Expands a timeline back to per-frame labels on [1, frames]; gaps get
// `background`. Test/rendering helper.
std::vector<int> labels_from_timeline(const SegmentTimeline& tl, Index frames,
                                      int background = -1);

std::string to_string(const SegmentTimeline& tl);

}  // namespace cats
