#include "cats/render.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cats/metrics.hpp"

namespace cats {

std::string class_color(int label) {
  static const char* kPalette[] = {
      "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948",
      "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac", "#86bcb6", "#d37295",
      "#a0cbe8", "#ffbe7d", "#8cd17d", "#b6992d",
  };
  constexpr int n = static_cast<int>(sizeof(kPalette) / sizeof(kPalette[0]));
  return kPalette[((label % n) + n) % n];
}

namespace {

double best_same_label_iou(const Segment& s, const SegmentTimeline& against) {
  double best = 0.0;
  for (const Segment& g : against.segments)
    if (g.label == s.label) best = std::max(best, iou(s, g));
  return best;
}

Index frame_span(const SegmentTimeline& gt, const SegmentTimeline& pred) {
  Index last = 1;
  for (const Segment& s : gt.segments) last = std::max(last, s.end);
  for (const Segment& s : pred.segments) last = std::max(last, s.end);
  return last;
}

}  // namespace

std::string render_timeline_svg(const SegmentTimeline& gt, const SegmentTimeline& pred,
                                double error_iou_threshold) {
  require_canonical(gt, "render_timeline_svg");
  require_canonical(pred, "render_timeline_svg");
  const double width = 800.0, band_h = 36.0, gap = 14.0, left = 60.0, top = 14.0;
  const Index span = frame_span(gt, pred);
  const double px = width / static_cast<double>(span);
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << left + width + 20
     << "\" height=\"" << 2 * band_h + gap + 2 * top + 18 << "\">\n";
  auto band = [&](const SegmentTimeline& tl, const SegmentTimeline& other, double y,
                  const char* name) {
    os << "  <text x=\"8\" y=\"" << y + band_h / 2 + 4 << "\" font-size=\"13\" "
       << "font-family=\"sans-serif\">" << name << "</text>\n";
    for (const Segment& s : tl.segments) {
      const double x = left + (static_cast<double>(s.start) - 1.0) * px;
      const double w = static_cast<double>(s.length()) * px;
      os << "  <rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << w << "\" height=\""
         << band_h << "\" fill=\"" << class_color(s.label) << "\"/>\n";
      os << "  <text x=\"" << x + w / 2 << "\" y=\"" << y + band_h / 2 + 4
         << "\" font-size=\"11\" text-anchor=\"middle\" font-family=\"sans-serif\">"
         << s.label << "</text>\n";
      if (best_same_label_iou(s, other) < error_iou_threshold)
        os << "  <rect x=\"" << x + 1 << "\" y=\"" << y + 1 << "\" width=\"" << w - 2
           << "\" height=\"" << band_h - 2
           << "\" fill=\"none\" stroke=\"red\" stroke-width=\"2\" "
              "stroke-dasharray=\"6 3\"/>\n";
    }
  };
  band(gt, pred, top, "GT");
  band(pred, gt, top + band_h + gap, "Pred");
  os << "</svg>\n";
  return os.str();
}

std::string render_timeline_text(const SegmentTimeline& gt, const SegmentTimeline& pred,
                                 double error_iou_threshold) {
  require_canonical(gt, "render_timeline_text");
  require_canonical(pred, "render_timeline_text");
  std::ostringstream os;
  os << "gt:   " << to_string(gt) << "\n";
  os << "pred: " << to_string(pred) << "\n";
  char line[160];
  for (const Segment& s : pred.segments) {
    const double b = best_same_label_iou(s, gt);
    std::snprintf(line, sizeof(line), "pred (%d,%lld,%lld) best_iou=%.3f%s\n", s.label,
                  static_cast<long long>(s.start), static_cast<long long>(s.end), b,
                  b < error_iou_threshold ? " ERROR" : "");
    os << line;
  }
  for (const Segment& s : gt.segments) {
    const double b = best_same_label_iou(s, pred);
    if (b < error_iou_threshold) {
      std::snprintf(line, sizeof(line), "gt   (%d,%lld,%lld) best_iou=%.3f MISSED\n", s.label,
                    static_cast<long long>(s.start), static_cast<long long>(s.end), b);
      os << line;
    }
  }
  return os.str();
}

std::string render_attention_svg(const Tensor& alpha) {
  if (alpha.dim() != 2)
    throw ShapeError("render_attention_svg: expected a square matrix, got " +
                     shape_str(alpha.shape()));
  const Index n = alpha.extent(0), m = alpha.extent(1);
  double mx = 0.0;
  for (Index i = 0; i < alpha.size(); ++i) mx = std::max(mx, alpha.data()[i]);
  if (mx <= 0.0) mx = 1.0;
  const double cell = std::max(4.0, std::min(16.0, 640.0 / static_cast<double>(m)));
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << m * cell << "\" height=\""
     << n * cell << "\">\n";
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j) {
      const double v = alpha.at({i, j}) / mx;
      const int shade = static_cast<int>(255.0 * (1.0 - v));
      char color[16];
      std::snprintf(color, sizeof(color), "#%02x%02xff", shade, shade);
      os << "  <rect x=\"" << j * cell << "\" y=\"" << i * cell << "\" width=\"" << cell
         << "\" height=\"" << cell << "\" fill=\"" << color << "\"/>\n";
    }
  os << "</svg>\n";
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_text_file: cannot open " + path);
  f << content;
  f.flush();
  if (!f) throw std::runtime_error("write_text_file: write failed for " + path);
}

}  // namespace cats
