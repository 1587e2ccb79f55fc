#include "fslam/core/camera.hpp"

namespace fslam {

Projection projectCamera(const Eigen::Vector3d& pc, const CameraIntrinsics& K) {
  Projection out;
  out.depth = pc.z();
  if (pc.z() <= 0.0) {
    out.status = ProjectionStatus::BehindCamera;
    return out;
  }
  const double inv_z = 1.0 / pc.z();
  out.uv = {K.fx * pc.x() * inv_z + K.cx, K.fy * pc.y() * inv_z + K.cy};
  const bool inside = out.uv.x() >= 0.0 && out.uv.x() < K.width && out.uv.y() >= 0.0 &&
                      out.uv.y() < K.height;
  out.status = inside ? ProjectionStatus::Ok : ProjectionStatus::OutOfView;
  return out;
}

Projection project(const Landmark& point, const Pose& pose, const CameraIntrinsics& K) {
  return projectCamera(pose * point, K);
}

}  // namespace fslam
