#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "fslam/map/covisibility_graph.hpp"

namespace fslam {

class MapIoError : public std::runtime_error {
 public:
  enum class Kind { Io, Malformed };
  MapIoError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Diagnostic map snapshot ("FSLM" container, see docs/formats.md): the full
/// covisibility graph — keyframes with keypoints/descriptors/BoW/edges/tree,
/// map points with observations — restorable bit-exactly.
void saveMapSnapshot(const CovisibilityGraph& graph, const std::filesystem::path& path);
CovisibilityGraph loadMapSnapshot(const std::filesystem::path& path);

}  // namespace fslam
