#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cwmap/featuremaps.hpp"
#include "cwmap/scene.hpp"

namespace cwmap {

struct EnergyConfig {
  double lambda_i = 0.05;          // seg vs dt mixing weight
  double min_width = 1.0;          // s2 - s1 bounds, meters
  double max_width = 10.0;
  double position_step = 0.04;     // spacing of candidate boundary positions
  double slice_step = 0.04;        // spacing of samples along a slice
  double search_window = 15.0;     // meters past the intersection edge
  double presence_threshold = 0.5; // mean seg needed to accept a crosswalk
  std::vector<double> angle_offsets_deg{-5.0, -2.0, 0.0, 2.0, 5.0};
};

// Which boundary angles are scored. kFull is the production setting; the
// others exist for ablations.
enum class CandidatePolicy {
  kFull,               // perpendicular + mode + offsets
  kNoOffsets,          // perpendicular + mode
  kNoCenterline,       // mode + offsets
  kPerpendicularOnly,
};

// Per-position slice statistics along a road at a fixed boundary angle.
// Entry k describes the slice through cl(positions[k]):
//   slice_seg  mean of 2*seg - 1 over the slice, [-1, 1] (0 when empty)
//   slice_dt   mean of dt / T, [0, 1]
//   seg_raw    mean of raw seg, [0, 1], presence evidence
//   prefix_seg running integral of slice_seg * position_step
struct Accumulator1D {
  std::vector<double> positions;
  std::vector<double> slice_seg;
  std::vector<double> slice_dt;
  std::vector<double> seg_raw;
  std::vector<double> prefix_seg;
};

struct CrosswalkPrediction {
  std::string road_id;
  double s1 = 0.0;
  double s2 = 0.0;
  double beta = 0.0;
  double energy = 0.0;
  Polygon polygon;
  bool present = false;
  // Histogram mode the candidate set was built from, when one existed.
  bool has_mode = false;
  double mode_angle = 0.0;
};

struct EnergyMax {
  double s1 = 0.0;
  double s2 = 0.0;
  double energy = 0.0;
  size_t i = 0;  // indices into the accumulator
  size_t j = 0;
};

// Mode of the dt-weighted 1-degree histogram of folded angles over pixels
// inside the corridor with angle_mask set and dt > 0. Returns the bin
// center; ties go to the smaller angle. nullopt when no pixel qualifies.
std::optional<double> extract_angle_mode(const FeatureMaps& maps, const Polygon& corridor);

// Candidate boundary angles: perpendicular to the centerline chord, then
// mode + offsets, deduplicated at 0.5 degrees (first occurrence kept).
std::vector<double> candidate_angles(const Polyline& centerline, std::optional<double> mode,
                                     const EnergyConfig& cfg,
                                     CandidatePolicy policy = CandidatePolicy::kFull);

// Slice statistics at angle beta for positions spanning from the road's
// exit of the intersection polygon to +search_window (clipped to the
// centerline). Throws SliceDegenerate when beta is within 5 degrees of the
// centerline direction, EmptyCorridor when every slice misses the grid.
Accumulator1D build_accumulator(const FeatureMaps& maps, const RoadCenterline& road,
                                const Polygon& intersection, double beta,
                                const EnergyConfig& cfg);

// Exact maximizer of
//   lambda_i * (prefix[j] - prefix[i]) + (1 - lambda_i) * (dt[j] + dt[i])
// over pairs with min_width <= positions[j] - positions[i] <= max_width.
// O(n) running-best scan; ties resolved to the smallest s1, then s2.
// Throws WindowTooShort when no pair satisfies the width bounds.
EnergyMax maximize_energy(const Accumulator1D& acc, const EnergyConfig& cfg);

// One prediction per road, in road order. Ground truth in `scene` is
// ignored. Throws GridMismatch when maps and scene disagree on the grid.
std::vector<CrosswalkPrediction> infer_scene(const Scene& scene, const FeatureMaps& maps,
                                             const EnergyConfig& cfg,
                                             CandidatePolicy policy = CandidatePolicy::kFull);

std::string predictions_to_json(const std::vector<CrosswalkPrediction>& preds);
std::vector<CrosswalkPrediction> predictions_from_json(const std::string& text);
void save_predictions(const std::vector<CrosswalkPrediction>& preds, const std::string& path);
std::vector<CrosswalkPrediction> load_predictions(const std::string& path);

}  // namespace cwmap
