#pragma once

#include <filesystem>
#include <string>

#include "fslam/eval/metrics.hpp"

namespace fslam {

/// key: value lines — aggregate metrics first, then one block per run.
std::string formatReport(const MetricReport& report);

/// Writes formatReport output; staged to a temp file then renamed so readers
/// never see a partial report.
void writeReport(const MetricReport& report, const std::filesystem::path& path);

/// Top-down SVG plot: reference, raw estimate, and aligned estimate
/// polylines. The view plane is spanned by the two highest-variance axes of
/// the reference trajectory.
void writeTrajectoryPlotSvg(const Trajectory& estimate, const Trajectory& reference,
                            const SimTransform& alignment, const std::filesystem::path& path);

}  // namespace fslam
