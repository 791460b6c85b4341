#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "kgas/image_io.hpp"

namespace kgas {

// Loss assembly weights. lambda terms combine the three groups; the alpha
// terms weight members inside a group (alpha4 is a perceptual-network slot
// whose contribution defaults to zero).
struct LossWeights {
  double lambda1 = 1.0;  // image group
  double lambda2 = 1.0;  // perceptual group
  double lambda3 = 1.0;  // joint rotation group
  double alpha1 = 0.5;   // mask inside image group
  double alpha2 = 0.2;   // 1 - SSIM
  double alpha3 = 0.5;   // 1 - S3IM
  double alpha4 = 0.3;   // perceptual-network slot (zero contribution)
  double alpha_joint = 0.06;

  void validate() const;
};

// Per-term values (similarities stored as similarities, not losses) plus
// the weighted total, which is recomputable from the parts to 1e-12.
struct LossReport {
  double color = 0.0;
  double mask = 0.0;
  double ssim = 1.0;
  double s3im = 1.0;
  double psnr = 0.0;
  double joint_nll = 0.0;
  double total = 0.0;
};

// RMS over RGB of alpha-premultiplied pixels.
double color_loss(const ImageRGBA& pred, const ImageRGBA& gt);

// RMS difference between rendered alpha and a binary reference mask.
double mask_loss(const std::vector<double>& pred_alpha,
                 const std::vector<double>& gt_mask);

// Mean windowed structural similarity, 11x11 Gaussian window (sigma 1.5),
// c1 = 0.01^2, c2 = 0.03^2, channels averaged. Images must be at least as
// large as the window.
double ssim(const ImageRGBA& pred, const ImageRGBA& gt);

// Windowed SSIM with an explicit kernel size and stride (Gaussian weights,
// sigma 1.5). ssim() is the special case window = 11, stride = 1.
double ssim_windowed(const ImageRGBA& pred, const ImageRGBA& gt, int window,
                     int stride);

// Stochastic structural similarity: m_shuffles pixel permutations (the
// first is the identity) applied to both images, each scored with
// kernel-size/stride windowed SSIM and averaged. Deterministic per seed.
double s3im(const ImageRGBA& pred, const ImageRGBA& gt, int m_shuffles,
            int kernel, int stride, std::uint64_t seed);

// 10 log10(1 / MSE) on unit-range channels; +inf for identical images.
double psnr(const ImageRGBA& pred, const ImageRGBA& gt);

// total = lambda1 (color + alpha1 mask)
//       + lambda2 (alpha2 (1-ssim) + alpha3 (1-s3im) + alpha4 * 0)
//       + lambda3 (alpha_joint * joint_nll).
LossReport total_loss(double color, double mask, double ssim_value,
                      double s3im_value, double psnr_value, double joint_nll,
                      const LossWeights& w);

// "name = value" metric dump, 9 significant digits, insertion order kept.
void save_metrics(const std::vector<std::pair<std::string, double>>& metrics,
                  const std::string& path);
std::vector<std::pair<std::string, double>> load_metrics(const std::string& path);
std::string format_metric(double value);

}  // namespace kgas
