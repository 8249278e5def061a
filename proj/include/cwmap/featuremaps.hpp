#pragma once

#include <cstdint>
#include <string>

#include "cwmap/geometry.hpp"
#include "cwmap/scene.hpp"

namespace cwmap {

// Inverse distance transform saturation, pixels. dt = max(0, T - d).
constexpr double kDtThresholdPx = 30.0;
// Angle channels are defined within this diameter around boundary edges.
constexpr double kAngleDilationPx = 30.0;

// The five channels a segmentation/regression network would predict:
//   seg        crosswalk probability, [0, 1]
//   dt         inverse truncated distance to crossing boundaries, [0, T] px
//   angle_x/y  unit vector of the folded boundary angle, on the dilation
//   angle_mask 1 where angle_x/y are defined
struct FeatureMaps {
  Grid seg;
  Grid dt;
  Grid angle_x;
  Grid angle_y;
  Grid angle_mask;

  const GridSpec& spec() const { return seg.spec; }
};

struct CorruptionConfig {
  double blur_sigma = 0.0;       // px, Gaussian, truncated at 3 sigma
  double noise_sigma = 0.0;      // additive, in channel units
  double hole_rate = 0.0;        // target fraction of area zeroed
  IntRange hole_size{16, 48};    // rectangle side, px
  double erosion_px = 0.0;       // disk radius applied to seg foreground
  double angle_jitter_deg = 0.0; // stddev of per-pixel angle perturbation
  uint64_t seed = 0;
};

// Ideal maps for a scene's ground truth. seg is exactly 0/1; dt peaks at T
// on the two crossing boundary edges of every crosswalk; angle channels hold
// the folded boundary direction near those edges (nearest edge wins, ties to
// the lower road id).
FeatureMaps render_oracle(const Scene& scene);

// Degrades maps in a fixed order: seg erosion, Gaussian blur of seg and dt,
// additive noise clamped to channel range, rectangular holes zeroing all
// channels, per-pixel angle jitter on masked pixels. Pure function of
// (maps, cfg); the all-zero config is the identity.
FeatureMaps corrupt(const FeatureMaps& maps, const CorruptionConfig& cfg);

// Binary container: magic "CWGRID1\n", ASCII "<width> <height> <channels>\n",
// planar row-major little-endian binary32 payload in channel order
// seg, dt, angle_x, angle_y, angle_mask, then the CRC-64 (ECMA polynomial,
// MSB-first, zero init) of the payload as 8 little-endian bytes.
void write_grids(const std::string& path, const FeatureMaps& maps);

// Reads the container back; `spec` supplies the world placement and must
// match the stored pixel dimensions (GridMismatch otherwise).
FeatureMaps read_grids(const std::string& path, const GridSpec& spec);

// Pixel dimensions and channel count of a stored container, without
// validating the payload.
void read_grid_header(const std::string& path, int& width_px, int& height_px,
                      int& channels);

// 8-bit PGM (P5, maxval 255); pixel = clamp(round(255 * v / scale), 0, 255),
// ties rounded up.
void export_pgm(const Grid& grid, const std::string& path, double scale);

uint64_t crc64_ecma(const uint8_t* data, size_t len);

}  // namespace cwmap
