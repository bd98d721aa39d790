#pragma once

// SceneSequence: one video's worth of tracks. T frames of H humans with J
// 2-D joints each, O objects with axis-aligned boxes, per-human frame-wise
// sub-activity labels, and per-entity visual vectors. Coordinates are pixels
// in a fixed canonical frame; occluded joints carry negative sentinel
// coordinates.

#include <cstdint>
#include <vector>

#include "cats/tensor.hpp"

namespace cats {

inline constexpr double kFrameWidth = 1920.0;
inline constexpr double kFrameHeight = 1080.0;
inline constexpr double kOccludedCoord = -1.0;

struct SceneSequence {
  std::int64_t video_id = 0;
  std::vector<int> subject_ids;
  Index T = 0, H = 0, J = 0, O = 0, dvis = 0;
  double frame_width = kFrameWidth;
  double frame_height = kFrameHeight;

  std::vector<double> joints;         // [T][H][J][2]
  std::vector<double> boxes;          // [T][O][4] as (x1,y1,x2,y2)
  std::vector<int> labels;            // [H][T]
  std::vector<double> visual_human;   // [T][H][dvis]
  std::vector<double> visual_object;  // [T][O][dvis]

  void allocate() {
    joints.assign(static_cast<std::size_t>(T * H * J * 2), 0.0);
    boxes.assign(static_cast<std::size_t>(T * O * 4), 0.0);
    labels.assign(static_cast<std::size_t>(H * T), 0);
    visual_human.assign(static_cast<std::size_t>(T * H * dvis), 0.0);
    visual_object.assign(static_cast<std::size_t>(T * O * dvis), 0.0);
  }

  double& joint_coord(Index t, Index h, Index j, Index c) {
    return joints[static_cast<std::size_t>(((t * H + h) * J + j) * 2 + c)];
  }
  double joint_coord(Index t, Index h, Index j, Index c) const {
    return joints[static_cast<std::size_t>(((t * H + h) * J + j) * 2 + c)];
  }
  bool joint_occluded(Index t, Index h, Index j) const {
    return joint_coord(t, h, j, 0) < 0.0 || joint_coord(t, h, j, 1) < 0.0;
  }
  double& box_coord(Index t, Index o, Index c) {
    return boxes[static_cast<std::size_t>((t * O + o) * 4 + c)];
  }
  double box_coord(Index t, Index o, Index c) const {
    return boxes[static_cast<std::size_t>((t * O + o) * 4 + c)];
  }
  int& label(Index h, Index t) { return labels[static_cast<std::size_t>(h * T + t)]; }
  int label(Index h, Index t) const { return labels[static_cast<std::size_t>(h * T + t)]; }
  double& vis_human(Index t, Index h, Index d) {
    return visual_human[static_cast<std::size_t>((t * H + h) * dvis + d)];
  }
  double vis_human(Index t, Index h, Index d) const {
    return visual_human[static_cast<std::size_t>((t * H + h) * dvis + d)];
  }
  double& vis_object(Index t, Index o, Index d) {
    return visual_object[static_cast<std::size_t>((t * O + o) * dvis + d)];
  }
  double vis_object(Index t, Index o, Index d) const {
    return visual_object[static_cast<std::size_t>((t * O + o) * dvis + d)];
  }

  std::vector<int> label_track(Index h) const {
    return std::vector<int>(labels.begin() + static_cast<std::ptrdiff_t>(h * T),
                            labels.begin() + static_cast<std::ptrdiff_t>((h + 1) * T));
  }

  // Throws ValueError on malformed tracks, inverted boxes, or label ids
  // outside [0, num_classes). num_classes < 0 skips the label-range check.
  void validate(int num_classes = -1) const;
};

}  // namespace cats
