#pragma once

#include "cwmap/featuremaps.hpp"
#include "cwmap/inference.hpp"
#include "cwmap/scene.hpp"

// Plain serial implementations kept alongside the parallel kernels. Tests
// hold the two sides bit-equal; the bench tool times them against each
// other. Nothing here is called from the production path.

namespace cwmap::reference {

// Winding-number point test, boundary inclusive.
bool point_in_polygon(Point2 p, const Polygon& poly);

// One pixel at a time over the whole grid, no bounding box.
Grid rasterize_polygon(const Polygon& poly, const GridSpec& g);

// Inverse truncated distance transform built directly on
// brute_force_distance_field over the crossing boundary edges.
Grid render_dt(const Scene& scene);

// Direct 2D convolution with the outer product of the truncated,
// renormalized 1D kernel; zero padding.
Grid blur2d(const Grid& in, double sigma);

// Every admissible pair, scored with the same energy expression the
// running-best scan uses; ties to the smallest s1, then s2.
EnergyMax maximize_energy_exhaustive(const Accumulator1D& acc, const EnergyConfig& cfg);

}  // namespace cwmap::reference
