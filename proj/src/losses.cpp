#include "cwmap/losses.hpp"

#include <cmath>
#include <vector>

namespace cwmap {

namespace {

void check_shapes(const Grid& a, const Grid& b) {
  if (a.spec.width_px != b.spec.width_px || a.spec.height_px != b.spec.height_px)
    fail(Err::ShapeMismatch, "grid dimensions differ");
}

// Parallel over rows, reduced in row order so the sum is independent of the
// thread count.
template <class PerRow>
double sum_rows(int height, PerRow&& per_row) {
  std::vector<double> partial(height, 0.0);
#pragma omp parallel for schedule(static)
  for (int row = 0; row < height; ++row) partial[row] = per_row(row);
  double s = 0.0;
  for (int row = 0; row < height; ++row) s += partial[row];
  return s;
}

}  // namespace

double seg_loss(const Grid& pred, const Grid& gt, double clamp_eps) {
  check_shapes(pred, gt);
  const int w = pred.spec.width_px, h = pred.spec.height_px;
  double s = sum_rows(h, [&](int row) {
    double acc = 0.0;
    for (int col = 0; col < w; ++col) {
      double y = std::min(std::max(double(pred.at(row, col)), clamp_eps), 1.0 - clamp_eps);
      double t = gt.at(row, col);
      acc += t * std::log(y) + (1.0 - t) * std::log(1.0 - y);
    }
    return acc;
  });
  return -s / (double(w) * h);
}

double dt_loss(const Grid& pred, const Grid& gt) {
  check_shapes(pred, gt);
  const int w = pred.spec.width_px, h = pred.spec.height_px;
  double s = sum_rows(h, [&](int row) {
    double acc = 0.0;
    for (int col = 0; col < w; ++col) {
      double d = double(pred.at(row, col)) - double(gt.at(row, col));
      acc += d * d;
    }
    return acc;
  });
  return s / (double(w) * h);
}

double alignment_loss(const Grid& pred_x, const Grid& pred_y, const Grid& gt_x,
                      const Grid& gt_y, const Grid& mask) {
  check_shapes(pred_x, mask);
  check_shapes(pred_y, mask);
  check_shapes(gt_x, mask);
  check_shapes(gt_y, mask);
  const int w = mask.spec.width_px, h = mask.spec.height_px;
  std::vector<double> partial(h, 0.0);
  std::vector<long long> counts(h, 0);
#pragma omp parallel for schedule(static)
  for (int row = 0; row < h; ++row) {
    double acc = 0.0;
    long long n = 0;
    for (int col = 0; col < w; ++col) {
      if (mask.at(row, col) < 0.5f) continue;
      double a = fold_angle(std::atan2(double(pred_y.at(row, col)),
                                       double(pred_x.at(row, col))));
      double b = fold_angle(std::atan2(double(gt_y.at(row, col)),
                                       double(gt_x.at(row, col))));
      double d = a - b;  // in (-pi, pi)
      if (d > kPi / 2.0) d -= kPi;
      if (d <= -kPi / 2.0) d += kPi;
      acc += d * d;
      ++n;
    }
    partial[row] = acc;
    counts[row] = n;
  }
  double s = 0.0;
  long long n = 0;
  for (int row = 0; row < h; ++row) {
    s += partial[row];
    n += counts[row];
  }
  if (n == 0) fail(Err::EmptyMask, "alignment loss over empty mask");
  return s / double(n);
}

LossReport total_loss(const FeatureMaps& pred, const FeatureMaps& gt,
                      const LossConfig& cfg) {
  LossReport r;
  r.seg = seg_loss(pred.seg, gt.seg, cfg.clamp_eps);
  r.dt = dt_loss(pred.dt, gt.dt);
  r.align = alignment_loss(pred.angle_x, pred.angle_y, gt.angle_x, gt.angle_y,
                           gt.angle_mask);
  r.total = r.seg + r.dt + cfg.lambda_align * r.align;
  return r;
}

}  // namespace cwmap
