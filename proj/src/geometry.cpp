#include "cats/geometry.hpp"

#include <string>

namespace cats {

void SceneSequence::validate(int num_classes) const {
  if (T < 0 || H < 0 || J < 0 || O < 0 || dvis < 0)
    throw ValueError("scene: negative extent");
  auto check_size = [&](const char* name, std::size_t have, Index want) {
    if (have != static_cast<std::size_t>(want))
      throw ValueError(std::string("scene: ") + name + " has " + std::to_string(have) +
                       " entries, expected " + std::to_string(want));
  };
  check_size("joints", joints.size(), T * H * J * 2);
  check_size("boxes", boxes.size(), T * O * 4);
  check_size("labels", labels.size(), H * T);
  check_size("visual_human", visual_human.size(), T * H * dvis);
  check_size("visual_object", visual_object.size(), T * O * dvis);
  for (Index t = 0; t < T; ++t)
    for (Index o = 0; o < O; ++o) {
      if (box_coord(t, o, 0) > box_coord(t, o, 2) || box_coord(t, o, 1) > box_coord(t, o, 3))
        throw ValueError("scene: inverted box for object " + std::to_string(o) + " at frame " +
                         std::to_string(t + 1));
    }
  if (num_classes >= 0)
    for (Index h = 0; h < H; ++h)
      for (Index t = 0; t < T; ++t)
        if (label(h, t) < 0 || label(h, t) >= num_classes)
          throw ValueError("scene: label " + std::to_string(label(h, t)) + " outside [0, " +
                           std::to_string(num_classes) + ")");
}

Tensor build_human_geometry(const SceneSequence& seq) {
  if (seq.T == 0 || seq.H == 0)
    throw ValueError("build_human_geometry: empty input (T=" + std::to_string(seq.T) +
                     ", H=" + std::to_string(seq.H) + ")");
  const Index T = seq.T, H = seq.H, J = seq.J, N = H * J;
  Tensor out = Tensor::zeros({T, N, 4});
  double* v = out.data();
  const double w = seq.frame_width, fh = seq.frame_height;
  for (Index t = 0; t < T; ++t)
    for (Index h = 0; h < H; ++h)
      for (Index j = 0; j < J; ++j) {
        double* row = v + (t * N + h * J + j) * 4;
        const bool valid = !seq.joint_occluded(t, h, j);
        if (valid) {
          row[0] = seq.joint_coord(t, h, j, 0) / w;
          row[1] = seq.joint_coord(t, h, j, 1) / fh;
        }
        if (t > 0 && valid && !seq.joint_occluded(t - 1, h, j)) {
          row[2] = row[0] - seq.joint_coord(t - 1, h, j, 0) / w;
          row[3] = row[1] - seq.joint_coord(t - 1, h, j, 1) / fh;
        }
      }
  return out;
}

Tensor build_object_geometry(const SceneSequence& seq) {
  if (seq.T == 0 || seq.O == 0)
    throw ValueError("build_object_geometry: empty input (T=" + std::to_string(seq.T) +
                     ", O=" + std::to_string(seq.O) + ")");
  const Index T = seq.T, O = seq.O, N = 2 * O;
  Tensor out = Tensor::zeros({T, N, 4});
  double* v = out.data();
  const double w = seq.frame_width, fh = seq.frame_height;
  for (Index t = 0; t < T; ++t)
    for (Index o = 0; o < O; ++o)
      for (Index u = 0; u < 2; ++u) {
        double* row = v + (t * N + 2 * o + u) * 4;
        row[0] = seq.box_coord(t, o, 2 * u) / w;
        row[1] = seq.box_coord(t, o, 2 * u + 1) / fh;
        if (t > 0) {
          row[2] = row[0] - seq.box_coord(t - 1, o, 2 * u) / w;
          row[3] = row[1] - seq.box_coord(t - 1, o, 2 * u + 1) / fh;
        }
      }
  return out;
}

}  // namespace cats
