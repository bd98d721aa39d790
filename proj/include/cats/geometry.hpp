#pragma once

// Raw geometric feature construction. Per frame, every human joint and every
// object box corner becomes one node row of (pos_x, pos_y, vel_x, vel_y):
// positions normalized to [0,1] by the frame dimensions, velocities as
// backward differences with frame-1 velocity exactly 0. Occluded joints are
// zero-filled with zero velocity.

#include "cats/scene.hpp"
#include "cats/tensor.hpp"

namespace cats {

// (T, H*J, 4); node row h*J + j is joint j of human h.
Tensor build_human_geometry(const SceneSequence& seq);

// (T, 2*O, 4); node rows 2o and 2o+1 are the (x1,y1) and (x2,y2) corners.
Tensor build_object_geometry(const SceneSequence& seq);

struct GeometricFeatures {
  Tensor human;   // (T, H*J, 4)
  Tensor object;  // (T, 2*O, 4)
};

inline GeometricFeatures build_geometry(const SceneSequence& seq) {
  return {build_human_geometry(seq), build_object_geometry(seq)};
}

}  // namespace cats
