#pragma once

// Timeline and attention rendering: color-banded SVG bars (ground truth over
// prediction) with dashed red outlines around segments whose best same-label
// IoU falls below a threshold, plus a plain-text diff. Attention matrices
// render as an SVG heat map.

#include <string>

#include "cats/tensor.hpp"
#include "cats/timeline.hpp"

namespace cats {

// Fixed palette keyed by class id (cycled), for cross-figure comparability.
std::string class_color(int label);

std::string render_timeline_svg(const SegmentTimeline& gt, const SegmentTimeline& pred,
                                double error_iou_threshold = 0.5);

std::string render_timeline_text(const SegmentTimeline& gt, const SegmentTimeline& pred,
                                 double error_iou_threshold = 0.5);

std::string render_attention_svg(const Tensor& alpha);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace cats
