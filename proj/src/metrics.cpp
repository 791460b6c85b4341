#include "kgas/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "kgas/error.hpp"
#include "kgas/rng.hpp"

namespace kgas {

namespace {

constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

void check_dims(const ImageRGBA& a, const ImageRGBA& b) {
  if (a.width != b.width || a.height != b.height)
    throw ValidationError("metric inputs differ in dimensions");
  if (a.width <= 0 || a.height <= 0)
    throw ValidationError("metric inputs are empty");
}

std::vector<double> gaussian_kernel(int size) {
  constexpr double sigma = 1.5;
  std::vector<double> k(size);
  double sum = 0.0;
  double center = 0.5 * (size - 1);
  for (int i = 0; i < size; ++i) {
    double d = i - center;
    k[i] = std::exp(-0.5 * d * d / (sigma * sigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Kahan-compensated mean over an accumulation callback.
struct MeanAccum {
  double sum = 0.0, comp = 0.0;
  std::size_t n = 0;
  void add(double v) {
    double y = v - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    ++n;
  }
  double mean() const { return n == 0 ? 0.0 : sum / static_cast<double>(n); }
};

}  // namespace

void LossWeights::validate() const {
  for (double v : {lambda1, lambda2, lambda3, alpha1, alpha2, alpha3, alpha4, alpha_joint})
    if (!(v >= 0.0))
      throw ValidationError("loss weights must be nonnegative");
}

double color_loss(const ImageRGBA& pred, const ImageRGBA& gt) {
  check_dims(pred, gt);
  MeanAccum acc;
  for (std::size_t i = 0; i < pred.rgb.size(); ++i) {
    double d = pred.rgb[i] - gt.rgb[i];
    acc.add(d * d);
  }
  return std::sqrt(acc.mean());
}

double mask_loss(const std::vector<double>& pred_alpha,
                 const std::vector<double>& gt_mask) {
  if (pred_alpha.size() != gt_mask.size())
    throw ValidationError("mask inputs differ in size");
  if (pred_alpha.empty()) throw ValidationError("mask inputs are empty");
  MeanAccum acc;
  for (std::size_t i = 0; i < pred_alpha.size(); ++i) {
    if (gt_mask[i] != 0.0 && gt_mask[i] != 1.0)
      throw ValidationError("reference mask must be binary");
    double d = pred_alpha[i] - gt_mask[i];
    acc.add(d * d);
  }
  return std::sqrt(acc.mean());
}

double ssim_windowed(const ImageRGBA& pred, const ImageRGBA& gt, int window,
                     int stride) {
  check_dims(pred, gt);
  if (window < 2) throw ValidationError("ssim window must be at least 2");
  if (stride < 1) throw ValidationError("ssim stride must be at least 1");
  if (pred.width < window || pred.height < window)
    throw ValidationError("image is smaller than the ssim window");

  std::vector<double> k = gaussian_kernel(window);
  int out_w = (pred.width - window) / stride + 1;
  int out_h = (pred.height - window) / stride + 1;

  MeanAccum total;
  // Direct weighted window statistics; desk-scale images keep this cheap.
  for (int c = 0; c < 3; ++c) {
    for (int wy = 0; wy < out_h; ++wy) {
      int y0 = wy * stride;
      for (int wx = 0; wx < out_w; ++wx) {
        int x0 = wx * stride;
        double mx = 0.0, my = 0.0, mxx = 0.0, myy = 0.0, mxy = 0.0;
        for (int dy = 0; dy < window; ++dy) {
          const double* prow = pred.pixel(x0, y0 + dy);
          const double* grow = gt.pixel(x0, y0 + dy);
          double wy_k = k[dy];
          for (int dx = 0; dx < window; ++dx) {
            double w = wy_k * k[dx];
            double pv = prow[3 * dx + c];
            double gv = grow[3 * dx + c];
            mx += w * pv;
            my += w * gv;
            mxx += w * pv * pv;
            myy += w * gv * gv;
            mxy += w * pv * gv;
          }
        }
        double vx = mxx - mx * mx;
        double vy = myy - my * my;
        double cxy = mxy - mx * my;
        double s = ((2.0 * mx * my + kC1) * (2.0 * cxy + kC2)) /
                   ((mx * mx + my * my + kC1) * (vx + vy + kC2));
        total.add(s);
      }
    }
  }
  return total.mean();
}

double ssim(const ImageRGBA& pred, const ImageRGBA& gt) {
  return ssim_windowed(pred, gt, 11, 1);
}

double s3im(const ImageRGBA& pred, const ImageRGBA& gt, int m_shuffles,
            int kernel, int stride, std::uint64_t seed) {
  check_dims(pred, gt);
  if (m_shuffles < 1) throw ValidationError("s3im needs at least one shuffle");
  std::size_t n = static_cast<std::size_t>(pred.width) * pred.height;
  if (pred.width < kernel || pred.height < kernel)
    throw ValidationError("image is smaller than the s3im kernel");

  std::vector<std::size_t> perm(n);
  Rng base(seed);
  MeanAccum total;
  for (int m = 0; m < m_shuffles; ++m) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    if (m > 0) {
      Rng rng = base.fork(static_cast<std::uint64_t>(m));
      for (std::size_t i = n - 1; i > 0; --i) {
        std::size_t j = rng.next_u64() % (i + 1);
        std::swap(perm[i], perm[j]);
      }
    }
    // The same permutation rearranges both images into new patches of the
    // original dimensions.
    ImageRGBA sp = ImageRGBA::blank(pred.width, pred.height);
    ImageRGBA sg = ImageRGBA::blank(pred.width, pred.height);
    for (std::size_t i = 0; i < n; ++i) {
      for (int c = 0; c < 3; ++c) {
        sp.rgb[3 * i + c] = pred.rgb[3 * perm[i] + c];
        sg.rgb[3 * i + c] = gt.rgb[3 * perm[i] + c];
      }
    }
    total.add(ssim_windowed(sp, sg, kernel, stride));
  }
  return total.mean();
}

double psnr(const ImageRGBA& pred, const ImageRGBA& gt) {
  check_dims(pred, gt);
  MeanAccum acc;
  for (std::size_t i = 0; i < pred.rgb.size(); ++i) {
    double d = pred.rgb[i] - gt.rgb[i];
    acc.add(d * d);
  }
  double mse = acc.mean();
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

LossReport total_loss(double color, double mask, double ssim_value,
                      double s3im_value, double psnr_value, double joint_nll,
                      const LossWeights& w) {
  w.validate();
  LossReport r;
  r.color = color;
  r.mask = mask;
  r.ssim = ssim_value;
  r.s3im = s3im_value;
  r.psnr = psnr_value;
  r.joint_nll = joint_nll;
  double l_image = color + w.alpha1 * mask;
  double l_percep = w.alpha2 * (1.0 - ssim_value) + w.alpha3 * (1.0 - s3im_value) +
                    w.alpha4 * 0.0;
  double l_joint = w.alpha_joint * joint_nll;
  r.total = w.lambda1 * l_image + w.lambda2 * l_percep + w.lambda3 * l_joint;
  return r;
}

std::string format_metric(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

void save_metrics(const std::vector<std::pair<std::string, double>>& metrics,
                  const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write metrics file: " + path);
  for (const auto& [name, value] : metrics)
    out << name << " = " << format_metric(value) << "\n";
}

std::vector<std::pair<std::string, double>> load_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open metrics file: " + path);
  std::vector<std::pair<std::string, double>> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto begin = line.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError(path + ":" + std::to_string(line_no) + ": expected name = value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      auto b = s.find_first_not_of(" \t\r\n");
      auto e = s.find_last_not_of(" \t\r\n");
      s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
    };
    trim(key);
    trim(value);
    try {
      out.emplace_back(key, std::stod(value));
    } catch (const std::exception&) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": cannot parse value '" + value + "'");
    }
  }
  return out;
}

}  // namespace kgas
