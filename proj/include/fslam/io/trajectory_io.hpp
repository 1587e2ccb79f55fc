#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "fslam/core/trajectory.hpp"

namespace fslam {

/// KITTI: 12 numbers per line, the row-major 3x4 camera-to-world matrix;
/// frame index stands in for the missing timestamp. TUM: "timestamp tx ty tz
/// qx qy qz qw" per line.
enum class TrajectoryFormat { Kitti, Tum };

class TrajectoryIoError : public std::runtime_error {
 public:
  TrajectoryIoError(const std::string& msg, int line = 0) : std::runtime_error(msg), line_(line) {}
  int line() const { return line_; }  // 1-based; 0 = not line-specific

 private:
  int line_;
};

/// Auto-detects the format from the column count of the first data line.
Trajectory loadTrajectory(const std::filesystem::path& path);
Trajectory loadTrajectory(const std::filesystem::path& path, TrajectoryFormat format);

/// Deterministic fixed-notation emission with enough digits for a lossless
/// double round-trip.
void saveTrajectory(const Trajectory& traj, const std::filesystem::path& path,
                    TrajectoryFormat format);

}  // namespace fslam
