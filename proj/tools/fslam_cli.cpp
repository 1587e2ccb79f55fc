#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <yaml-cpp/yaml.h>

#include "fslam/bow/vocabulary.hpp"
#include "fslam/eval/metrics.hpp"
#include "fslam/eval/report.hpp"
#include "fslam/features/extractor.hpp"
#include "fslam/features/feature_file.hpp"
#include "fslam/imaging/gamma.hpp"
#include "fslam/io/euroc.hpp"
#include "fslam/io/kitti.hpp"
#include "fslam/io/synthetic.hpp"
#include "fslam/io/trajectory_io.hpp"
#include "fslam/slam/system.hpp"

namespace fs = std::filesystem;
using namespace fslam;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNeverInitialized = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Run configuration (YAML file + flag overrides); see docs/formats.md.

struct RunConfig {
  std::string source = "synthetic";  // kitti | euroc | synthetic | feature-file
  std::string dataset;               // root dir, scene yaml, or .fslf path
  std::string sequence = "00";       // kitti only
  std::string features = "builtin";  // builtin | <fslf path>, image sources only
  int feature_count = 1000;
  PyramidConfig pyramid;
  MatchThresholds thresholds;
  std::string vocab;  // empty: train from the sequence
  int vocab_k = 10;
  int vocab_levels = 3;
  double gamma = 1.0;
  int runs = 1;
  std::uint64_t seed = 1;
  std::string out = "out";
  bool loop_closing = true;
  bool relocalization = true;
  bool monocular = true;
  CameraIntrinsics camera;         // feature-file source
  double fps = 10.0;               // feature-file timestamps: frame_id / fps
  std::string truth;               // feature-file ground-truth trajectory
  std::vector<double> rpe_lengths; // empty: auto-scaled from the reference
};

void mergeConfigFile(RunConfig& cfg, const fs::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  try {
    auto str = [&](const char* key, std::string& out) {
      if (root[key]) out = root[key].as<std::string>();
    };
    str("source", cfg.source);
    str("dataset", cfg.dataset);
    str("sequence", cfg.sequence);
    str("features", cfg.features);
    str("vocab", cfg.vocab);
    str("out", cfg.out);
    str("truth", cfg.truth);
    if (root["feature_count"]) cfg.feature_count = root["feature_count"].as<int>();
    if (root["pyramid"]) {
      const auto p = root["pyramid"];
      if (p["scale_factor"]) cfg.pyramid.scale_factor = p["scale_factor"].as<double>();
      if (p["levels"]) cfg.pyramid.n_levels = p["levels"].as<int>();
    }
    if (root["thresholds"]) {
      const auto t = root["thresholds"];
      if (t["low"]) cfg.thresholds.th_low = t["low"].as<double>();
      if (t["high"]) cfg.thresholds.th_high = t["high"].as<double>();
      if (t["ratio"]) cfg.thresholds.ratio = t["ratio"].as<double>();
      if (t["real_scale"]) cfg.thresholds.real_scale = t["real_scale"].as<double>();
    }
    if (root["vocab_k"]) cfg.vocab_k = root["vocab_k"].as<int>();
    if (root["vocab_levels"]) cfg.vocab_levels = root["vocab_levels"].as<int>();
    if (root["gamma"]) cfg.gamma = root["gamma"].as<double>();
    if (root["runs"]) cfg.runs = root["runs"].as<int>();
    if (root["seed"]) cfg.seed = root["seed"].as<std::uint64_t>();
    if (root["loop_closing"]) cfg.loop_closing = root["loop_closing"].as<bool>();
    if (root["relocalization"]) cfg.relocalization = root["relocalization"].as<bool>();
    if (root["monocular"]) cfg.monocular = root["monocular"].as<bool>();
    if (root["camera"]) {
      const auto c = root["camera"];
      cfg.camera.fx = c["fx"].as<double>();
      cfg.camera.fy = c["fy"].as<double>();
      cfg.camera.cx = c["cx"].as<double>();
      cfg.camera.cy = c["cy"].as<double>();
      cfg.camera.width = c["width"].as<int>();
      cfg.camera.height = c["height"].as<int>();
    }
    if (root["fps"]) cfg.fps = root["fps"].as<double>();
    if (root["rpe_lengths"]) cfg.rpe_lengths = root["rpe_lengths"].as<std::vector<double>>();
  } catch (const YAML::Exception& e) {
    throw ConfigError("bad value in " + path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Feature-file sequence: frames come entirely from an FSLF container; camera
// and frame rate come from the config, ground truth from an optional file.

class FeatureFileSource final : public SequenceSource {
 public:
  FeatureFileSource(const fs::path& path, const CameraIntrinsics& camera, double fps,
                    const fs::path& truth_path)
      : file_(path), ids_(file_.frameIds()), camera_(camera), fps_(fps) {
    if (ids_.empty()) throw ConfigError(path.string() + ": no frames");
    if (!camera_.isValid())
      throw ConfigError("feature-file source needs a valid camera: block in the config");
    if (!truth_path.empty()) {
      Trajectory truth = loadTrajectory(truth_path);
      if (truth.size() == ids_.size())  // index-stamped files adopt frame timestamps
        for (std::size_t i = 0; i < ids_.size(); ++i)
          truth.points[i].timestamp = static_cast<double>(ids_[i]) / fps_;
      truth_ = std::move(truth);
    }
  }

  std::size_t size() const override { return ids_.size(); }
  SequenceFrame frame(std::size_t index) const override {
    FrameFeatures ff = file_.frame(ids_[index]);
    SequenceFrame out;
    out.id = ff.frame_id;
    out.timestamp = static_cast<double>(ff.frame_id) / fps_;
    out.keypoints = std::move(ff.keypoints);
    out.descriptors = std::move(ff.descriptors);
    return out;
  }
  const CameraIntrinsics& intrinsics() const override { return camera_; }
  const std::optional<Trajectory>& groundTruth() const override { return truth_; }

 private:
  FeatureFile file_;
  std::vector<std::uint64_t> ids_;
  CameraIntrinsics camera_;
  double fps_;
  std::optional<Trajectory> truth_;
};

std::unique_ptr<SequenceSource> buildSource(const RunConfig& cfg) {
  if (cfg.dataset.empty()) throw ConfigError("source '" + cfg.source + "' needs --dataset");
  if (cfg.source == "kitti") return std::make_unique<KittiSource>(cfg.dataset, cfg.sequence);
  if (cfg.source == "euroc") return std::make_unique<EurocSource>(cfg.dataset);
  if (cfg.source == "synthetic")
    return std::make_unique<SyntheticSource>(loadSceneConfig(cfg.dataset), cfg.seed);
  if (cfg.source == "feature-file")
    return std::make_unique<FeatureFileSource>(cfg.dataset, cfg.camera, cfg.fps, cfg.truth);
  throw ConfigError("unknown source '" + cfg.source + "'");
}

// ---------------------------------------------------------------------------

Frame makeFrame(const SequenceFrame& sf, const RunConfig& cfg, const FeatureFile* external,
                const std::optional<GammaParam>& gamma) {
  Frame f;
  f.id = sf.id;
  f.timestamp = sf.timestamp;
  if (sf.hasFeatures()) {
    f.keypoints = sf.keypoints;
    f.descriptors = sf.descriptors;
    f.truth_ids = sf.truth_ids;
    return f;
  }
  if (!sf.hasImage())
    throw ConfigError("frame " + std::to_string(sf.id) + " carries neither image nor features");
  if (external) {
    FrameFeatures ff = external->frame(sf.id);
    f.keypoints = std::move(ff.keypoints);
    f.descriptors = std::move(ff.descriptors);
    return f;
  }
  const GrayImage* img = &sf.image;
  GrayImage distorted;
  if (gamma) {
    distorted = gammaTransform(sf.image, *gamma);
    img = &distorted;
  }
  ExtractedFeatures ex = detectAndDescribe(*img, cfg.pyramid, cfg.feature_count);
  f.keypoints = std::move(ex.keypoints);
  f.descriptors = std::move(ex.descriptors);
  return f;
}

// Samples descriptors across the sequence and trains a vocabulary; returns an
// empty vocabulary when the corpus cannot support the branching factor.
Vocabulary trainSequenceVocabulary(const SequenceSource& source, const RunConfig& cfg,
                                   const FeatureFile* external,
                                   const std::optional<GammaParam>& gamma) {
  const std::size_t n = source.size();
  const std::size_t stride = std::max<std::size_t>(1, n / 20);
  std::optional<DescriptorSet> corpus;
  for (std::size_t i = 0; i < n && (!corpus || corpus->size() < 8000); i += stride) {
    Frame f = makeFrame(source.frame(i), cfg, external, gamma);
    if (f.descriptors.empty()) continue;
    if (!corpus)
      corpus = f.descriptors.kind() == DescriptorKind::Binary
                   ? DescriptorSet::binary(f.descriptors.length())
                   : DescriptorSet::real(f.descriptors.length());
    for (std::size_t j = 0; j < f.descriptors.size(); ++j) corpus->addRowFrom(f.descriptors, j);
  }
  if (!corpus) return {};
  try {
    return Vocabulary::train(*corpus, cfg.vocab_k, cfg.vocab_levels, cfg.seed);
  } catch (const VocabularyError&) {
    return {};
  }
}

double arcLength(const Trajectory& t) {
  double s = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) s += (t.position(i) - t.position(i - 1)).norm();
  return s;
}

// KITTI lengths when the reference covers them; otherwise eight equal
// fractions of the total path, keeping the grid shape at desk scale.
std::vector<double> pickRpeLengths(const RunConfig& cfg, const Trajectory& ref) {
  if (!cfg.rpe_lengths.empty()) return cfg.rpe_lengths;
  const double total = arcLength(ref);
  if (total >= 2.0 * kittiLengths().front()) return kittiLengths();
  std::vector<double> lengths;
  for (int i = 1; i <= 8; ++i) lengths.push_back(total * 0.1 * i);
  return lengths;
}

MetricReport runMetrics(const Trajectory& est, const Trajectory& ref, bool monocular,
                        const std::vector<double>& lengths) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  MetricReport r;
  r.run_count = 1;
  const AteResult ate = computeAte(est, ref, monocular);
  // RPE on the ATE-aligned estimate: a monocular trajectory carries an
  // arbitrary global scale that would otherwise dominate the drift numbers.
  const RpeResult rpe = ate.ok() ? computeRpe(transformed(est, ate.alignment), ref, lengths)
                                 : computeRpe(est, ref, lengths);
  r.ate_rmse = ate.ok() ? ate.rmse : nan;
  r.rpe_trans = rpe.ok() ? rpe.trans_percent : nan;
  r.rpe_rot = rpe.ok() ? rpe.rot_deg_per_unit : nan;
  r.coverage = trajectoryCoverage(est, ref);
  r.per_run_ate = {r.ate_rmse};
  r.per_run_rpe_trans = {r.rpe_trans};
  r.per_run_rpe_rot = {r.rpe_rot};
  r.per_run_coverage = {r.coverage};
  return r;
}

void atomicSaveTrajectory(const Trajectory& t, const fs::path& path, TrajectoryFormat format) {
  fs::path tmp = path;
  tmp += ".tmp";
  saveTrajectory(t, tmp, format);
  fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// run-slam

int cmdRunSlam(const RunConfig& cfg) {
  if (cfg.runs < 1) throw ConfigError("runs must be >= 1");
  if (cfg.gamma <= 0.0) throw ConfigError("gamma must be positive");
  if (!cfg.pyramid.isValid()) throw ConfigError("invalid pyramid config");
  if (!cfg.thresholds.isValid()) throw ConfigError("invalid match thresholds");

  std::unique_ptr<SequenceSource> source = buildSource(cfg);

  std::optional<GammaParam> gamma;
  if (cfg.gamma != 1.0) gamma.emplace(cfg.gamma);

  std::optional<FeatureFile> external;
  if (cfg.features != "builtin") {
    if (!fs::is_regular_file(cfg.features))
      throw ConfigError("feature file not found: " + cfg.features);
    external.emplace(cfg.features);
  }
  const FeatureFile* ext = external ? &*external : nullptr;

  bool loop_closing = cfg.loop_closing;
  bool relocalization = cfg.relocalization;
  Vocabulary vocab;
  if (loop_closing || relocalization) {
    if (!cfg.vocab.empty()) {
      if (!fs::is_regular_file(cfg.vocab))
        throw ConfigError("vocabulary not found: " + cfg.vocab);
      vocab = Vocabulary::load(cfg.vocab);
    } else {
      vocab = trainSequenceVocabulary(*source, cfg, ext, gamma);
      if (vocab.empty()) {
        std::cerr << "warning: corpus too small for a vocabulary; "
                     "loop closing and relocalization disabled\n";
        loop_closing = relocalization = false;
      }
    }
  }

  const fs::path out_dir = cfg.out;
  fs::create_directories(out_dir);

  const std::size_t n = source->size();
  std::vector<MetricReport> reports;
  Trajectory last_est;
  std::optional<SimTransform> last_alignment;
  int completed = 0;

  for (int r = 0; r < cfg.runs; ++r) {
    SystemOptions opt;
    opt.K = source->intrinsics();
    opt.tracking.thresholds = cfg.thresholds;
    opt.mapping.thresholds = cfg.thresholds;
    opt.loop.thresholds = cfg.thresholds;
    opt.enable_loop_closing = loop_closing;
    opt.enable_relocalization = relocalization;
    opt.seed = cfg.seed + static_cast<std::uint64_t>(r);
    opt.loop.seed = opt.seed;

    SlamSystem sys(opt);
    if (!vocab.empty()) sys.setVocabulary(vocab);
    for (std::size_t i = 0; i < n; ++i) sys.process(makeFrame(source->frame(i), cfg, ext, gamma));

    const Trajectory est = sys.trajectory();
    const fs::path run_dir = out_dir / ("run_" + std::to_string(r));
    fs::create_directories(run_dir);
    atomicSaveTrajectory(est, run_dir / "trajectory.tum", TrajectoryFormat::Tum);

    const SystemStats& st = sys.stats();
    std::cout << "run " << r << ": seed " << opt.seed << ", frames " << st.frames << ", tracked "
              << st.tracked_frames << ", keyframes " << st.keyframes << ", points "
              << st.points_created << ", loops " << st.loops << ", relocalizations "
              << st.relocalizations << "\n";

    if (!est.empty()) ++completed;
    if (source->groundTruth()) {
      const Trajectory& ref = *source->groundTruth();
      MetricReport rep = runMetrics(est, ref, cfg.monocular, pickRpeLengths(cfg, ref));
      if (!est.empty()) {
        const AteResult ate = computeAte(est, ref, cfg.monocular);
        if (ate.ok()) {
          last_est = est;
          last_alignment = ate.alignment;
        }
      }
      reports.push_back(std::move(rep));
    }
  }

  if (!reports.empty()) {
    const MetricReport summary = aggregate(reports);
    std::cout << formatReport(summary);
    writeReport(summary, out_dir / "report.txt");
    if (last_alignment && source->groundTruth())
      writeTrajectoryPlotSvg(last_est, *source->groundTruth(), *last_alignment,
                             out_dir / "trajectory.svg");
  }
  return completed > 0 ? kExitOk : kExitNeverInitialized;
}

// ---------------------------------------------------------------------------
// eval

const char* metricStatusName(MetricStatus s) {
  switch (s) {
    case MetricStatus::Ok: return "ok";
    case MetricStatus::TooFewAssociations: return "too-few-associations";
    case MetricStatus::CollinearDegenerate: return "collinear-degenerate";
    case MetricStatus::TrajectoryTooShort: return "trajectory-too-short";
  }
  return "unknown";
}

int cmdEval(const std::string& est_path, const std::string& ref_path, bool se3,
            std::vector<double> lengths, double tolerance, const std::string& out_path,
            const std::string& plot_path) {
  Trajectory est, ref;
  try {
    est = loadTrajectory(est_path);
    ref = loadTrajectory(ref_path);
  } catch (const TrajectoryIoError& e) {
    std::cerr << "error: " << e.what();
    if (e.line() > 0) std::cerr << " (line " << e.line() << ")";
    std::cerr << "\n";
    return kExitConfig;
  }
  if (lengths.empty()) {
    const double total = arcLength(ref);
    if (total >= 2.0 * kittiLengths().front()) {
      lengths = kittiLengths();
    } else {
      for (int i = 1; i <= 8; ++i) lengths.push_back(total * 0.1 * i);
    }
  }

  const AteResult ate = computeAte(est, ref, !se3, tolerance);
  const RpeResult rpe = computeRpe(est, ref, lengths, tolerance);
  MetricReport report = runMetrics(est, ref, !se3, lengths);
  std::cout << formatReport(report);
  if (!out_path.empty()) writeReport(report, out_path);
  if (!plot_path.empty() && ate.ok())
    writeTrajectoryPlotSvg(est, ref, ate.alignment, plot_path);

  if (!ate.ok()) {
    std::cerr << "error: ATE failed: " << metricStatusName(ate.status) << "\n";
    return 1;
  }
  if (!rpe.ok()) {
    std::cerr << "error: RPE failed: " << metricStatusName(rpe.status) << "\n";
    return 1;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// distort

int cmdDistort(const std::string& in_dir, const std::string& out_dir, double gamma) {
  if (gamma <= 0.0) throw ConfigError("gamma must be positive");
  const int count = distortSequence(in_dir, out_dir, GammaParam(gamma));
  std::cout << "distorted " << count << " images\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train-vocab

int cmdTrainVocab(const std::string& corpus_path, int k, int levels, std::uint64_t seed,
                  const std::string& out_path) {
  FeatureFile file{fs::path(corpus_path)};
  std::optional<DescriptorSet> corpus;
  for (const std::uint64_t id : file.frameIds()) {
    const FrameFeatures ff = file.frame(id);
    if (ff.descriptors.empty()) continue;
    if (!corpus)
      corpus = ff.descriptors.kind() == DescriptorKind::Binary
                   ? DescriptorSet::binary(ff.descriptors.length())
                   : DescriptorSet::real(ff.descriptors.length());
    for (std::size_t j = 0; j < ff.descriptors.size(); ++j) corpus->addRowFrom(ff.descriptors, j);
  }
  if (!corpus) throw ConfigError(corpus_path + ": no descriptors");
  const Vocabulary vocab = Vocabulary::train(*corpus, k, levels, seed);
  fs::path tmp = fs::path(out_path);
  tmp += ".tmp";
  if (tmp.has_parent_path()) fs::create_directories(tmp.parent_path());
  vocab.save(tmp);
  fs::rename(tmp, out_path);
  std::cout << "trained vocabulary: " << vocab.wordCount() << " words from " << corpus->size()
            << " descriptors\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// synth

int cmdSynth(const std::string& scene_path, std::uint64_t seed, const std::string& out_dir) {
  SyntheticSceneConfig scene;
  if (!scene_path.empty()) scene = loadSceneConfig(scene_path);
  const SyntheticSource source(scene, seed);
  const fs::path out(out_dir);
  fs::create_directories(out);

  const CameraIntrinsics& K = source.intrinsics();
  {
    std::ofstream calib(out / "calib.txt");
    calib.precision(12);
    calib << "P0: " << K.fx << " 0 " << K.cx << " 0 0 " << K.fy << " " << K.cy << " 0 0 0 1 0\n";
  }
  {
    std::ofstream times(out / "times.txt");
    times.precision(9);
    times << std::fixed;
    for (int i = 0; i < scene.frame_count; ++i) times << i / scene.fps << "\n";
  }
  atomicSaveTrajectory(*source.groundTruth(), out / "poses.txt", TrajectoryFormat::Kitti);

  if (scene.regime == DescriptorRegime::Rendered) {
    const fs::path image_dir = out / "image_0";
    fs::create_directories(image_dir);
    for (std::size_t i = 0; i < source.size(); ++i) {
      std::ostringstream name;
      name.width(6);
      name.fill('0');
      name << i;
      savePng(source.frame(i).image, image_dir / (name.str() + ".png"));
    }
  } else {
    std::vector<FrameFeatures> frames;
    for (std::size_t i = 0; i < source.size(); ++i) {
      SequenceFrame sf = source.frame(i);
      frames.push_back({sf.id, std::move(sf.keypoints), std::move(sf.descriptors)});
    }
    writeFeatureFile(out / "features.fslf", frames);
  }
  std::cout << "wrote " << source.size() << " frames to " << out_dir << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"feature-pluggable monocular SLAM pipeline"};
  app.require_subcommand(1);

  // run-slam
  RunConfig cfg;
  std::string config_path;
  auto* run = app.add_subcommand("run-slam", "run the pipeline over a sequence");
  run->add_option("--config", config_path, "YAML run configuration");
  auto* src = run->add_option("--source", cfg.source, "kitti | euroc | synthetic | feature-file");
  auto* ds = run->add_option("--dataset", cfg.dataset, "dataset root / scene yaml / fslf file");
  auto* sq = run->add_option("--sequence", cfg.sequence, "kitti sequence id");
  auto* ft = run->add_option("--features", cfg.features, "builtin or an external feature file");
  auto* vc = run->add_option("--vocab", cfg.vocab, "vocabulary file (trained in-run if omitted)");
  auto* gm = run->add_option("--gamma", cfg.gamma, "exposure distortion applied to input images");
  auto* rn = run->add_option("--runs", cfg.runs, "number of seeded executions");
  auto* sd = run->add_option("--seed", cfg.seed, "base seed; run r uses seed + r");
  auto* ot = run->add_option("--out", cfg.out, "output directory");

  // eval
  std::string est_path, ref_path, eval_out, eval_plot;
  std::vector<double> eval_lengths;
  bool eval_se3 = false;
  double eval_tolerance = 0.01;
  auto* ev = app.add_subcommand("eval", "trajectory metrics for an estimate/reference pair");
  ev->add_option("--est", est_path, "estimated trajectory file")->required();
  ev->add_option("--ref", ref_path, "reference trajectory file")->required();
  ev->add_flag("--se3", eval_se3, "align with SE(3) instead of Sim(3)");
  ev->add_option("--lengths", eval_lengths, "RPE path lengths")->delimiter(',');
  ev->add_option("--tolerance", eval_tolerance, "association tolerance, seconds");
  ev->add_option("--out", eval_out, "write the report here as well");
  ev->add_option("--plot", eval_plot, "write a trajectory SVG here");

  // distort
  std::string distort_in, distort_out;
  double distort_gamma = 1.0;
  auto* di = app.add_subcommand("distort", "gamma-distort an image directory");
  di->add_option("--in", distort_in, "input image directory")->required();
  di->add_option("--out", distort_out, "output image directory")->required();
  di->add_option("--gamma", distort_gamma, "gamma exponent")->required();

  // train-vocab
  std::string tv_features, tv_out;
  int tv_k = 10, tv_levels = 6;
  std::uint64_t tv_seed = 1;
  auto* tv = app.add_subcommand("train-vocab", "train a vocabulary from a feature file");
  tv->add_option("--features", tv_features, "feature corpus (FSLF)")->required();
  tv->add_option("--k", tv_k, "branching factor");
  tv->add_option("--levels", tv_levels, "tree depth");
  tv->add_option("--seed", tv_seed, "k-means seed");
  tv->add_option("--out", tv_out, "output vocabulary file")->required();

  // synth
  std::string synth_scene, synth_out;
  std::uint64_t synth_seed = 1;
  auto* sy = app.add_subcommand("synth", "materialize a synthetic scene as a dataset directory");
  sy->add_option("--scene", synth_scene, "scene YAML (defaults used if omitted)");
  sy->add_option("--seed", synth_seed, "scene seed");
  sy->add_option("--out", synth_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (app.got_subcommand(run)) {
      if (!config_path.empty()) {
        // Flags override file values: re-parse the flag set on top.
        RunConfig file_cfg;
        mergeConfigFile(file_cfg, config_path);
        if (!*src) cfg.source = file_cfg.source;
        if (!*ds) cfg.dataset = file_cfg.dataset;
        if (!*sq) cfg.sequence = file_cfg.sequence;
        if (!*ft) cfg.features = file_cfg.features;
        if (!*vc) cfg.vocab = file_cfg.vocab;
        if (!*gm) cfg.gamma = file_cfg.gamma;
        if (!*rn) cfg.runs = file_cfg.runs;
        if (!*sd) cfg.seed = file_cfg.seed;
        if (!*ot) cfg.out = file_cfg.out;
        cfg.feature_count = file_cfg.feature_count;
        cfg.pyramid = file_cfg.pyramid;
        cfg.thresholds = file_cfg.thresholds;
        cfg.vocab_k = file_cfg.vocab_k;
        cfg.vocab_levels = file_cfg.vocab_levels;
        cfg.loop_closing = file_cfg.loop_closing;
        cfg.relocalization = file_cfg.relocalization;
        cfg.monocular = file_cfg.monocular;
        cfg.camera = file_cfg.camera;
        cfg.fps = file_cfg.fps;
        cfg.truth = file_cfg.truth;
        cfg.rpe_lengths = file_cfg.rpe_lengths;
      }
      return cmdRunSlam(cfg);
    }
    if (app.got_subcommand(ev))
      return cmdEval(est_path, ref_path, eval_se3, eval_lengths, eval_tolerance, eval_out,
                     eval_plot);
    if (app.got_subcommand(di)) return cmdDistort(distort_in, distort_out, distort_gamma);
    if (app.got_subcommand(tv)) return cmdTrainVocab(tv_features, tv_k, tv_levels, tv_seed, tv_out);
    if (app.got_subcommand(sy)) return cmdSynth(synth_scene, synth_seed, synth_out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
