#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kgas/cloud.hpp"
#include "kgas/error.hpp"
#include "kgas/fisher.hpp"
#include "kgas/image_io.hpp"
#include "kgas/metrics.hpp"
#include "kgas/pipeline.hpp"
#include "kgas/render.hpp"
#include "kgas/rng.hpp"
#include "kgas/scene.hpp"
#include "kgas/uid.hpp"

namespace {

using namespace kgas;

Mat3 mat_from(const std::vector<double>& v) {
  Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = v[static_cast<std::size_t>(3 * i + j)];
  return m;
}

void print_mat(const Mat3& m) {
  for (int i = 0; i < 3; ++i)
    std::printf("%s %s %s\n", format_metric(m[static_cast<std::size_t>(i)][0]).c_str(),
                format_metric(m[static_cast<std::size_t>(i)][1]).c_str(),
                format_metric(m[static_cast<std::size_t>(i)][2]).c_str());
}

int run_cli(int argc, char** argv) {
  CLI::App app{"motion-aware Gaussian splatting toolkit"};
  app.require_subcommand(1);

  // scene
  auto* scene_cmd = app.add_subcommand("scene", "generate a synthetic scene's files");
  std::string scene_name = "arm2";
  std::uint64_t scene_seed = 42;
  std::string scene_out = "scene_out";
  scene_cmd->add_option("--name", scene_name,
                        "arm2, chain4, humanoid24 or creased_sheet");
  scene_cmd->add_option("--seed", scene_seed, "sampling seed");
  scene_cmd->add_option("--out", scene_out, "output directory");

  // run
  auto* run_cmd = app.add_subcommand("run", "run an experiment config");
  std::string run_config;
  std::string run_out_override;
  run_cmd->add_option("--config", run_config, "experiment config file")->required();
  run_cmd->add_option("--out", run_out_override, "override run.out_dir");

  // detect
  auto* detect_cmd = app.add_subcommand("detect", "flag deformed surface regions");
  std::string detect_cloud, detect_report;
  UidParams detect_params;
  bool detect_unfolded = false;
  detect_cmd->add_option("--cloud", detect_cloud, "PLY with point positions")->required();
  detect_cmd->add_option("--k", detect_params.k, "neighborhood size");
  detect_cmd->add_option("--threshold", detect_params.threshold_deg,
                         "flag angle threshold, degrees");
  detect_cmd->add_flag("--unfolded", detect_unfolded,
                       "compare oriented normals instead of undirected lines");
  detect_cmd->add_option("--report", detect_report, "write the full report here");

  // render
  auto* render_cmd = app.add_subcommand("render", "render a Gaussian cloud");
  std::string render_cloud, render_camera, render_out;
  std::string render_depth, render_alpha;
  render_cmd->add_option("--cloud", render_cloud, "Gaussian cloud PLY")->required();
  render_cmd->add_option("--camera", render_camera, "camera file")->required();
  render_cmd->add_option("--out", render_out, "output PPM")->required();
  render_cmd->add_option("--depth", render_depth, "also write depth PFM");
  render_cmd->add_option("--alpha", render_alpha, "also write alpha PGM");

  // metrics
  auto* metrics_cmd = app.add_subcommand("metrics", "score a render against a reference");
  std::string m_pred, m_gt, m_pred_alpha, m_gt_mask, m_out;
  double m_joint_nll = 0.0;
  LossWeights m_weights;
  int m_shuffles = 10, m_kernel = 4, m_stride = 4;
  std::uint64_t m_seed = 0;
  metrics_cmd->add_option("--pred", m_pred, "rendered PPM")->required();
  metrics_cmd->add_option("--gt", m_gt, "reference PPM")->required();
  metrics_cmd->add_option("--pred-alpha", m_pred_alpha, "rendered alpha PGM");
  metrics_cmd->add_option("--gt-mask", m_gt_mask, "binary reference mask PGM");
  metrics_cmd->add_option("--joint-nll", m_joint_nll, "joint rotation NLL term");
  metrics_cmd->add_option("--s3im-shuffles", m_shuffles, "shuffle count");
  metrics_cmd->add_option("--s3im-kernel", m_kernel, "window size");
  metrics_cmd->add_option("--s3im-stride", m_stride, "window stride");
  metrics_cmd->add_option("--s3im-seed", m_seed, "shuffle seed");
  metrics_cmd->add_option("--out", m_out, "also write metrics file");

  // fisher
  auto* fisher_cmd = app.add_subcommand("fisher", "rotation-belief utilities");
  fisher_cmd->require_subcommand(1);
  std::vector<double> f_param, f_rot;

  auto* mode_cmd = fisher_cmd->add_subcommand("mode", "mode rotation and concentration");
  mode_cmd->add_option("--f", f_param, "parameter matrix, 9 row-major entries")
      ->expected(9)->required();

  auto* sample_cmd = fisher_cmd->add_subcommand("sample", "draw rotations");
  std::size_t sample_n = 10;
  std::uint64_t sample_seed = 1;
  sample_cmd->add_option("--f", f_param, "parameter matrix, 9 row-major entries")
      ->expected(9)->required();
  sample_cmd->add_option("-n,--count", sample_n, "number of samples");
  sample_cmd->add_option("--seed", sample_seed, "sampler seed");

  auto* nll_cmd = fisher_cmd->add_subcommand("nll", "negative log density of a rotation");
  nll_cmd->add_option("--f", f_param, "parameter matrix, 9 row-major entries")
      ->expected(9)->required();
  nll_cmd->add_option("--r", f_rot, "rotation matrix, 9 row-major entries")
      ->expected(9)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (*scene_cmd) {
    const Scene scene = make_scene(scene_name, scene_seed);
    write_scene_files(scene, scene_out);
    std::printf("scene %s: %zu joints, %zu reference / %zu initial gaussians -> %s\n",
                scene.name.c_str(), scene.rig.tree.joint_count(),
                scene.reference.gaussians.size(), scene.initial.gaussians.size(),
                scene_out.c_str());
    return 0;
  }

  if (*run_cmd) {
    ExperimentConfig config = load_config(run_config);
    if (!run_out_override.empty()) config.out_dir = run_out_override;
    const RunResult result = run_pipeline(config);
    for (std::size_t i = 0; i < result.iterations.size(); ++i) {
      const auto& it = result.iterations[i];
      std::printf("iter %zu: gaussians=%zu flagged=%zu cloned=%zu split=%zu "
                  "color=%s total=%s\n",
                  i, it.gaussians, it.flagged, it.cloned, it.split,
                  format_metric(it.loss.color).c_str(),
                  format_metric(it.loss.total).c_str());
    }
    std::printf("manifest %s/manifest.txt\n", result.out_dir.c_str());
    return 0;
  }

  if (*detect_cmd) {
    detect_params.folded = !detect_unfolded;
    const std::vector<Vec3> points = load_ply_points(detect_cloud);
    const UidReport report = uid_detect(points, detect_params);
    if (!detect_report.empty()) save_uid_report(report, detect_report);
    std::printf("points %zu flagged %zu\n", report.points.size(),
                report.flagged_count());
    return 0;
  }

  if (*render_cmd) {
    const GaussianCloud cloud = load_ply_cloud(render_cloud);
    const Camera camera = load_camera(render_camera);
    const ImageRGBA img = render(cloud, camera);
    write_ppm(img, render_out);
    if (!render_depth.empty())
      write_pfm(img.depth, img.width, img.height, render_depth);
    if (!render_alpha.empty())
      write_pgm(img.alpha, img.width, img.height, render_alpha);
    std::printf("rendered %zu gaussians to %s\n", cloud.gaussians.size(),
                render_out.c_str());
    return 0;
  }

  if (*metrics_cmd) {
    const ImageRGBA pred = read_ppm(m_pred);
    const ImageRGBA gt = read_ppm(m_gt);
    double mask_v = 0.0;
    if (!m_pred_alpha.empty() != !m_gt_mask.empty())
      throw ValidationError("--pred-alpha and --gt-mask must be given together");
    ImageRGBA pred_full = pred;
    if (!m_pred_alpha.empty()) {
      int w = 0, h = 0;
      pred_full.alpha = read_pgm(m_pred_alpha, w, h);
      if (w != pred.width || h != pred.height)
        throw ValidationError("alpha dimensions disagree with --pred");
      int mw = 0, mh = 0;
      const std::vector<double> mask = read_pgm(m_gt_mask, mw, mh);
      if (mw != pred.width || mh != pred.height)
        throw ValidationError("mask dimensions disagree with --pred");
      mask_v = mask_loss(pred_full.alpha, mask);
    }
    const double color_v = color_loss(pred_full, gt);
    const double ssim_v = ssim(pred_full, gt);
    const double s3im_v = s3im(pred_full, gt, m_shuffles, m_kernel, m_stride, m_seed);
    const double psnr_v = psnr(pred_full, gt);
    const LossReport report =
        total_loss(color_v, mask_v, ssim_v, s3im_v, psnr_v, m_joint_nll, m_weights);
    const std::vector<std::pair<std::string, double>> rows = {
        {"color_loss", report.color}, {"mask_loss", report.mask},
        {"ssim", report.ssim},        {"s3im", report.s3im},
        {"psnr", report.psnr},        {"joint_nll", report.joint_nll},
        {"total_loss", report.total}};
    for (const auto& [k, v] : rows)
      std::printf("%s = %s\n", k.c_str(), format_metric(v).c_str());
    if (!m_out.empty()) save_metrics(rows, m_out);
    return 0;
  }

  const FisherParams params = FisherParams::from(mat_from(f_param));
  if (*mode_cmd) {
    print_mat(mode(params).m);
    const Vec3 kappa = concentration_profile(params);
    std::printf("concentration %s %s %s\n", format_metric(kappa.x).c_str(),
                format_metric(kappa.y).c_str(), format_metric(kappa.z).c_str());
    return 0;
  }
  if (*sample_cmd) {
    const std::vector<RotationMatrix> draws = sample(params, sample_n, sample_seed);
    for (const auto& r : draws) {
      double w, x, y, z;
      mat_to_quat(r.m, w, x, y, z);
      std::printf("%s %s %s %s\n", format_metric(w).c_str(),
                  format_metric(x).c_str(), format_metric(y).c_str(),
                  format_metric(z).c_str());
    }
    return 0;
  }
  // fisher nll
  RotationMatrix r;
  r.m = mat_from(f_rot);
  if (!r.valid(1e-6))
    throw ValidationError("--r is not a rotation matrix (orthonormality off by more than 1e-6)");
  std::printf("nll = %s\n", format_metric(nll(params, r)).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
