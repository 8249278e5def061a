#pragma once

#include "cwmap/featuremaps.hpp"

namespace cwmap {

struct LossConfig {
  double lambda_align = 100.0;
  double clamp_eps = 1e-7;  // keeps log finite on saturated predictions
};

struct LossReport {
  double seg = 0.0;
  double dt = 0.0;
  double align = 0.0;
  double total = 0.0;
};

// Binary cross entropy, mean over all pixels; pred clamped to
// [eps, 1 - eps]. Throws ShapeMismatch when dimensions differ.
double seg_loss(const Grid& pred, const Grid& gt, double clamp_eps = 1e-7);

// Mean squared error over all pixels.
double dt_loss(const Grid& pred, const Grid& gt);

// Mean squared folded angular difference over masked pixels, the
// difference wrapped into (-pi/2, pi/2]. Throws EmptyMask when no pixel
// is masked.
double alignment_loss(const Grid& pred_x, const Grid& pred_y, const Grid& gt_x,
                      const Grid& gt_y, const Grid& mask);

// total = seg + dt + lambda_align * align, alignment evaluated on the
// ground-truth mask.
LossReport total_loss(const FeatureMaps& pred, const FeatureMaps& gt,
                      const LossConfig& cfg = {});

}  // namespace cwmap
