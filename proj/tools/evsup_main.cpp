// evsup: event suppression pipeline CLI. One subcommand per pipeline stage,
// file-based I/O, one JSON summary on stdout. Exit codes: 1 usage, 2 file
// format / I/O, 3 contract or numeric violation.

#include "evsup/bench.hpp"
#include "evsup/event_core.hpp"
#include "evsup/flow_cmax.hpp"
#include "evsup/io.hpp"
#include "evsup/losses.hpp"
#include "evsup/metrics.hpp"
#include "evsup/suppression.hpp"
#include "evsup/synth.hpp"
#include "evsup/token_prune.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

using nlohmann::json;
using namespace evsup;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t default_seed(std::uint64_t fallback) {
  if (const char* env = std::getenv("EVSUP_SEED")) return std::strtoull(env, nullptr, 10);
  return fallback;
}

void print_summary(const json& j) { std::cout << j.dump() << '\n'; }

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw FormatError("write failed: " + path);
}

EventStream load_events(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") return read_events_csv(path);
  return read_events_evs1(path);
}

MaskLogits load_logits(const std::string& logits_path, const std::string& mask_path,
                       Real magnitude) {
  if (!logits_path.empty()) return read_logits_mlg1(logits_path);
  return to_logits(read_mask_pgm(mask_path), magnitude);
}

json match_report_json(const MatchReport& report) {
  json pairs = json::array();
  for (const MatchPair& p : report.pairs)
    pairs.push_back({{"pred", p.pred}, {"gt", p.gt}, {"iou", p.iou}});
  return {{"pairs", pairs},
          {"unmatched_gt", report.unmatched_gt},
          {"r_at_05", report.r_at_05},
          {"miou", report.miou}};
}

ImoConfig parse_imo(const std::string& spec) {
  // shape:size:x0:y0:vx:vy with shape in {rect, disk}
  ImoConfig imo;
  std::istringstream in(spec);
  std::string shape;
  std::getline(in, shape, ':');
  if (shape == "rect")
    imo.shape = ImoConfig::Shape::rectangle;
  else if (shape == "disk")
    imo.shape = ImoConfig::Shape::disk;
  else
    throw CLI::ValidationError("--imo", "shape must be rect or disk");
  char sep = ':';
  std::string rest;
  std::getline(in, rest);
  if (std::sscanf(rest.c_str(), "%lf%c%lf%c%lf%c%lf%c%lf", &imo.size_px, &sep, &imo.x0, &sep,
                  &imo.y0, &sep, &imo.vx, &sep, &imo.vy) != 9)
    throw CLI::ValidationError("--imo", "expected shape:size:x0:y0:vx:vy");
  return imo;
}

json scene_json(const SceneConfig& cfg) {
  json imos = json::array();
  for (const ImoConfig& imo : cfg.imos)
    imos.push_back({{"shape", imo.shape == ImoConfig::Shape::rectangle ? "rect" : "disk"},
                    {"size_px", imo.size_px},
                    {"x0", imo.x0},
                    {"y0", imo.y0},
                    {"vx", imo.vx},
                    {"vy", imo.vy}});
  return {{"width", cfg.width},
          {"height", cfg.height},
          {"duration_us", cfg.duration_us},
          {"cam_vx", cfg.cam_vx},
          {"cam_vy", cfg.cam_vy},
          {"edge_density", cfg.edge_density},
          {"cadence_us", cfg.cadence_us},
          {"micro_step_us", cfg.micro_step_us},
          {"seed", cfg.seed},
          {"single_edge", cfg.single_edge},
          {"imos", imos}};
}

int run_app(int argc, char** argv) {
  CLI::App app{"evsup: anticipatory motion suppression for event streams"};
  app.require_subcommand(1);
  std::function<void()> action;

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "generate a labeled synthetic scene");
  auto scene = std::make_shared<SceneConfig>(SceneConfig::default_scene());
  auto synth_out = std::make_shared<std::string>();
  auto preset = std::make_shared<std::string>("default");
  auto imo_specs = std::make_shared<std::vector<std::string>>();
  synth->add_option("--out-dir", *synth_out, "output directory")->required();
  synth->add_option("--preset", *preset, "default | single-edge")
      ->check(CLI::IsMember({"default", "single-edge"}));
  synth->add_option("--width", scene->width);
  synth->add_option("--height", scene->height);
  synth->add_option("--duration", scene->duration_us, "scene duration (us)");
  synth->add_option("--cam-vx", scene->cam_vx, "camera-induced velocity (px/s)");
  synth->add_option("--cam-vy", scene->cam_vy);
  synth->add_option("--density", scene->edge_density, "background edges per 100 px");
  synth->add_option("--cadence", scene->cadence_us, "ground-truth cadence (us)");
  synth->add_option("--micro-step", scene->micro_step_us);
  auto synth_seed = std::make_shared<std::uint64_t>(default_seed(7));
  synth->add_option("--seed", *synth_seed);
  synth->add_option("--imo", *imo_specs, "shape:size:x0:y0:vx:vy, repeatable (replaces preset IMOs)");
  synth->callback([=, &action] {
    action = [=] {
      SceneConfig cfg = *scene;
      if (*preset == "single-edge") {
        SceneConfig base = SceneConfig::single_edge_scene();
        // explicit geometry/motion flags still apply on top of the preset
        if (synth->count("--width") == 0) cfg.width = base.width;
        if (synth->count("--height") == 0) cfg.height = base.height;
        if (synth->count("--duration") == 0) cfg.duration_us = base.duration_us;
        if (synth->count("--cam-vx") == 0) cfg.cam_vx = base.cam_vx;
        if (synth->count("--cam-vy") == 0) cfg.cam_vy = base.cam_vy;
        if (synth->count("--density") == 0) cfg.edge_density = base.edge_density;
        if (synth->count("--cadence") == 0) cfg.cadence_us = base.cadence_us;
        cfg.single_edge = true;
        cfg.imos.clear();
      }
      cfg.seed = *synth_seed;
      if (!imo_specs->empty()) {
        cfg.imos.clear();
        for (const std::string& s : *imo_specs) cfg.imos.push_back(parse_imo(s));
      }
      const LabeledStream ls = generate(cfg);
      const std::filesystem::path dir(*synth_out);
      std::filesystem::create_directories(dir);
      json files = json::array();
      auto emit = [&files](const std::filesystem::path& p) { files.push_back(p.string()); };
      write_events_evs1((dir / "events.evs1").string(), ls.stream);
      emit(dir / "events.evs1");
      write_labels_csv((dir / "labels.csv").string(), ls.labels);
      emit(dir / "labels.csv");
      for (std::size_t k = 0; k < ls.gt_times_us.size(); ++k) {
        const auto name = "mask_" + std::to_string(ls.gt_times_us[k]) + ".pgm";
        write_mask_pgm((dir / name).string(), ls.gt_masks[k]);
        emit(dir / name);
      }
      for (std::size_t k = 0; k + 1 < ls.gt_times_us.size(); ++k) {
        const auto name = "flow_" + std::to_string(ls.gt_times_us[k]) + ".flo1";
        write_flow_flo1((dir / name).string(), ls.gt_flows[k]);
        emit(dir / name);
      }
      write_json_file((dir / "scene.json").string(), scene_json(cfg));
      emit(dir / "scene.json");
      print_summary({{"events", ls.stream.size()},
                     {"imo_left_frame", ls.imo_left_frame},
                     {"files", files}});
    };
  });

  // ---- encode ----
  auto* encode = app.add_subcommand("encode", "voxel-encode an event window");
  auto enc_in = std::make_shared<std::string>();
  auto enc_out = std::make_shared<std::string>();
  auto enc_bins = std::make_shared<int>(2);
  auto enc_t0 = std::make_shared<std::int64_t>(0);
  auto enc_t1 = std::make_shared<std::int64_t>(0);
  encode->add_option("--events", *enc_in, "input .evs1 or .csv")->required();
  encode->add_option("--bins", *enc_bins);
  encode->add_option("--t0", *enc_t0, "window start (us)");
  encode->add_option("--t1", *enc_t1, "window end (us, 0 = event extent)");
  encode->add_option("--out", *enc_out, "optional .vox1 output");
  encode->callback([=, &action] {
    action = [=] {
      EventStream stream = load_events(*enc_in);
      std::int64_t t0 = *enc_t0;
      std::int64_t t1 = *enc_t1;
      if (t1 <= t0 && !stream.empty()) {
        t0 = stream.events.front().t;
        t1 = stream.events.back().t + 1;
      }
      const VoxelGrid grid = encode_voxel(stream, *enc_bins, t0, t1);
      if (!enc_out->empty()) write_voxel_vox1(*enc_out, grid);
      print_summary({{"bins", grid.bins},
                     {"width", grid.width},
                     {"height", grid.height},
                     {"t0", grid.t0},
                     {"t1", grid.t1},
                     {"signed_mass", grid.signed_mass()},
                     {"abs_mass", grid.abs_mass()}});
    };
  });

  // ---- suppress ----
  auto* supp = app.add_subcommand("suppress", "gate events with a binary mask");
  auto sup_in = std::make_shared<std::string>();
  auto sup_mask = std::make_shared<std::string>();
  auto sup_keep = std::make_shared<std::string>("imo");
  auto sup_out = std::make_shared<std::string>();
  auto sup_flags = std::make_shared<std::string>();
  supp->add_option("--events", *sup_in)->required();
  supp->add_option("--mask", *sup_mask, "mask .pgm")->required();
  supp->add_option("--keep", *sup_keep)->check(CLI::IsMember({"imo", "ego"}));
  supp->add_option("--out", *sup_out, "filtered .evs1")->required();
  supp->add_option("--flags-out", *sup_flags, "optional per-event keep flags csv");
  supp->callback([=, &action] {
    action = [=] {
      const EventStream stream = load_events(*sup_in);
      const IMOMask mask = read_mask_pgm(*sup_mask);
      const Keep keep = *sup_keep == "imo" ? Keep::imo : Keep::ego;
      const auto flags = event_keep_flags(stream, mask, keep);
      const EventStream kept = suppress(stream, mask, keep);
      write_events_evs1(*sup_out, kept);
      if (!sup_flags->empty()) write_labels_csv(*sup_flags, flags);
      print_summary({{"total", stream.size()}, {"kept", kept.size()}, {"keep", *sup_keep}});
    };
  });

  // ---- cmax ----
  auto* cmax = app.add_subcommand("cmax", "contrast-maximization flow estimation");
  auto cm_in = std::make_shared<std::string>();
  auto cm_out = std::make_shared<std::string>();
  auto cm_tile = std::make_shared<int>(32);
  auto cm_cfg = std::make_shared<CmaxConfig>();
  cmax->add_option("--events", *cm_in)->required();
  cmax->add_option("--tile", *cm_tile, "tile size (px)");
  cmax->add_option("--t0", cm_cfg->window_t0, "window start (us)");
  cmax->add_option("--t1", cm_cfg->window_t1, "window end (us, 0 = event extent)");
  cmax->add_option("--grid-range", cm_cfg->grid_range, "coarse search half-range (px)");
  cmax->add_option("--grid-step", cm_cfg->grid_step);
  cmax->add_option("--iters", cm_cfg->ascent_iters, "gradient-ascent iterations");
  cmax->add_option("--step", cm_cfg->step_px, "ascent step (px)");
  cmax->add_option("--out", *cm_out, "estimated flow .flo1")->required();
  cmax->callback([=, &action] {
    action = [=] {
      const EventStream stream = load_events(*cm_in);
      const FlowField flow = estimate_flow_cmax(stream, *cm_tile, *cm_cfg);
      write_flow_flo1(*cm_out, flow);
      print_summary({{"width", flow.width()},
                     {"height", flow.height()},
                     {"dur_ref_us", flow.dur_ref_us},
                     {"u_min", flow.u.minCoeff()},
                     {"u_max", flow.u.maxCoeff()},
                     {"v_min", flow.v.minCoeff()},
                     {"v_max", flow.v.maxCoeff()}});
    };
  });

  // ---- warp-mask ----
  auto* warp = app.add_subcommand("warp-mask", "backward-warp soft mask logits");
  auto wm_logits = std::make_shared<std::string>();
  auto wm_mask = std::make_shared<std::string>();
  auto wm_flow = std::make_shared<std::string>();
  auto wm_out = std::make_shared<std::string>();
  auto wm_dtp = std::make_shared<std::int64_t>(100000);
  warp->add_option("--logits", *wm_logits, "input .mlg1");
  warp->add_option("--mask", *wm_mask, "binary .pgm (converted to +/-10 logits)");
  warp->add_option("--flow", *wm_flow)->required();
  warp->add_option("--dtp", *wm_dtp, "prediction horizon (us)");
  warp->add_option("--out", *wm_out, "warped logits .mlg1")->required();
  warp->callback([=, &action] {
    action = [=] {
      if (wm_logits->empty() && wm_mask->empty())
        throw UsageError("warp-mask: give --logits or --mask");
      const MaskLogits logits = load_logits(*wm_logits, *wm_mask, 10.0);
      const FlowField flow = read_flow_flo1(*wm_flow);
      const MaskLogits warped = warp_mask(logits, flow, *wm_dtp);
      write_logits_mlg1(*wm_out, warped);
      print_summary({{"dtp_us", *wm_dtp}, {"out", *wm_out}});
    };
  });

  // ---- anticipate ----
  auto* antic = app.add_subcommand("anticipate", "warp + threshold into a future mask");
  auto an_logits = std::make_shared<std::string>();
  auto an_mask = std::make_shared<std::string>();
  auto an_flow = std::make_shared<std::string>();
  auto an_out = std::make_shared<std::string>();
  auto an_dtp = std::make_shared<std::int64_t>(100000);
  auto an_tau = std::make_shared<Real>(0.5);
  antic->add_option("--logits", *an_logits, "input .mlg1");
  antic->add_option("--mask", *an_mask, "binary .pgm (converted to +/-10 logits)");
  antic->add_option("--flow", *an_flow)->required();
  antic->add_option("--dtp", *an_dtp, "prediction horizon (us)");
  antic->add_option("--tau", *an_tau, "probability threshold");
  antic->add_option("--out", *an_out, "anticipated mask .pgm")->required();
  antic->callback([=, &action] {
    action = [=] {
      if (an_logits->empty() && an_mask->empty())
        throw UsageError("anticipate: give --logits or --mask");
      const MaskLogits logits = load_logits(*an_logits, *an_mask, 10.0);
      const FlowField flow = read_flow_flo1(*an_flow);
      const IMOMask mask = anticipate(logits, flow, *an_dtp, *an_tau);
      write_mask_pgm(*an_out, mask);
      print_summary({{"dtp_us", *an_dtp}, {"tau", *an_tau}, {"imo_pixels", mask.count()}});
    };
  });

  // ---- metrics ----
  auto* metrics = app.add_subcommand("metrics", "segmentation metrics vs ground truth");
  auto me_pred = std::make_shared<std::string>();
  auto me_gt = std::make_shared<std::string>();
  auto me_pred_flags = std::make_shared<std::string>();
  auto me_gt_labels = std::make_shared<std::string>();
  auto me_out = std::make_shared<std::string>();
  metrics->add_option("--pred", *me_pred, "predicted mask .pgm")->required();
  metrics->add_option("--gt", *me_gt, "ground-truth mask .pgm")->required();
  metrics->add_option("--pred-flags", *me_pred_flags, "kept-event flags csv (enables piou)");
  metrics->add_option("--gt-labels", *me_gt_labels, "per-event labels csv (enables piou)");
  metrics->add_option("--out", *me_out, "optional report json file");
  metrics->callback([=, &action] {
    action = [=] {
      const IMOMask pred = read_mask_pgm(*me_pred);
      const IMOMask gt = read_mask_pgm(*me_gt);
      const MatchReport report = hungarian_match(connected_components(pred),
                                                 connected_components(gt));
      json j = match_report_json(report);
      j["iou"] = iou(pred, gt);
      if (!me_pred_flags->empty() && !me_gt_labels->empty())
        j["piou"] = piou(read_labels_csv(*me_pred_flags), read_labels_csv(*me_gt_labels));
      if (!me_out->empty()) write_json_file(*me_out, j);
      print_summary(j);
    };
  });

  // ---- losses ----
  auto* losses = app.add_subcommand("losses", "loss suite over mask/flow/event inputs");
  auto lo_pred_logits = std::make_shared<std::string>();
  auto lo_gt_mask = std::make_shared<std::string>();
  auto lo_fut_logits = std::make_shared<std::string>();
  auto lo_fut_gt = std::make_shared<std::string>();
  auto lo_pred_flow = std::make_shared<std::string>();
  auto lo_gt_flow = std::make_shared<std::string>();
  auto lo_valid = std::make_shared<std::string>();
  auto lo_events = std::make_shared<std::string>();
  auto lo_t0 = std::make_shared<std::int64_t>(0);
  auto lo_t1 = std::make_shared<std::int64_t>(0);
  auto weights = std::make_shared<LossWeights>();
  losses->add_option("--pred-logits", *lo_pred_logits, "current mask logits .mlg1");
  losses->add_option("--gt-mask", *lo_gt_mask, "current GT mask .pgm");
  losses->add_option("--fut-logits", *lo_fut_logits, "future mask logits .mlg1");
  losses->add_option("--fut-gt-mask", *lo_fut_gt, "future GT mask .pgm");
  losses->add_option("--pred-flow", *lo_pred_flow, "predicted flow .flo1");
  losses->add_option("--gt-flow", *lo_gt_flow, "GT flow .flo1");
  losses->add_option("--valid", *lo_valid, "valid-pixel mask .pgm (default all valid)");
  losses->add_option("--events", *lo_events, "events .evs1 for the unsupervised term");
  losses->add_option("--t0", *lo_t0);
  losses->add_option("--t1", *lo_t1);
  losses->add_option("--w-sup", weights->w_sup);
  losses->add_option("--w-unsup", weights->w_unsup);
  losses->add_option("--lambda-future", weights->future_mask);
  losses->add_option("--lambda-flow", weights->flow);
  losses->add_option("--lambda-smooth", weights->smooth);
  losses->add_option("--w-bce", weights->w_bce);
  losses->add_option("--w-dice", weights->w_dice);
  losses->add_option("--eps-charb", weights->eps_charb);
  losses->add_option("--eps-dice", weights->eps_dice);
  losses->callback([=, &action] {
    action = [=] {
      json j;
      Real l_sup = 0;
      Real l_unsup = 0;
      if (!lo_pred_logits->empty() && !lo_gt_mask->empty()) {
        const MaskLogits pred = read_logits_mlg1(*lo_pred_logits);
        const IMOMask gt = read_mask_pgm(*lo_gt_mask);
        j["bce"] = bce(pred.values, gt.values);
        j["dice"] = dice_loss(logistic(pred.values), gt.values, weights->eps_dice);
        j["bce_dice"] = bce_dice(pred.values, gt.values, *weights);
        Real mask_term;
        if (!lo_fut_logits->empty() && !lo_fut_gt->empty()) {
          const MaskLogits fut = read_logits_mlg1(*lo_fut_logits);
          const IMOMask fut_gt = read_mask_pgm(*lo_fut_gt);
          mask_term = mask_loss(pred.values, gt.values, &fut.values, &fut_gt.values, *weights);
        } else {
          mask_term = mask_loss(pred.values, gt.values, nullptr, nullptr, *weights);
        }
        j["mask"] = mask_term;
        l_sup += mask_term;
      }
      std::optional<FlowField> pred_flow;
      if (!lo_pred_flow->empty()) pred_flow = read_flow_flo1(*lo_pred_flow);
      if (pred_flow && !lo_gt_flow->empty()) {
        const FlowField gt_flow = read_flow_flo1(*lo_gt_flow);
        ImageU8 valid = lo_valid->empty()
                            ? ImageU8::Constant(pred_flow->u.rows(), pred_flow->u.cols(), 1)
                            : read_mask_pgm(*lo_valid).values;
        j["flow_l1"] = flow_l1(*pred_flow, gt_flow, valid);
        j["smooth"] = charbonnier_smooth(*pred_flow, weights->eps_charb);
        const Real fs = flow_sup_loss(*pred_flow, gt_flow, valid, *weights);
        j["flow_sup"] = fs;
        l_sup += fs;
      }
      if (pred_flow && !lo_events->empty()) {
        EventStream stream = load_events(*lo_events);
        std::int64_t t0 = *lo_t0;
        std::int64_t t1 = *lo_t1;
        if (t1 > t0) stream = slice_by_time(stream, t0, t1);
        else if (!stream.empty()) t0 = stream.events.front().t;
        const IWE iwe = build_iwe(transport_events(stream, *pred_flow, t0),
                                  pred_flow->height(), pred_flow->width());
        l_unsup = -variance_focus(iwe);
        j["unsup"] = l_unsup;
      }
      j["total"] = total_loss(l_sup, l_unsup, *weights);
      print_summary(j);
    };
  });

  // ---- bench ----
  auto* bench = app.add_subcommand("bench", "wall-clock micro-benchmark");
  auto be_op = std::make_shared<std::string>();
  auto be_trials = std::make_shared<int>(1000);
  auto be_threads = std::make_shared<int>(1);
  auto be_seed = std::make_shared<std::uint64_t>(default_seed(0));
  auto be_json = std::make_shared<std::string>();
  bench->add_option("--op", *be_op, "one of: voxel_encode, warp_mask, iwe, suppress, atc")
      ->required()
      ->check(CLI::IsMember(benchmark_names()));
  bench->add_option("--trials", *be_trials);
  bench->add_option("--threads", *be_threads);
  bench->add_option("--seed", *be_seed);
  bench->add_option("--json", *be_json, "write the report to this file too");
  bench->callback([=, &action] {
    action = [=] {
      const TimingReport report = run_named_benchmark(*be_op, *be_trials, *be_threads, *be_seed);
      const json j = {{"op", *be_op},          {"trials", report.trials},
                      {"mean_us", report.mean_us}, {"std_us", report.std_us},
                      {"min_us", report.min_us},   {"threads", report.threads},
                      {"input_shape", report.input_shape}};
      if (!be_json->empty()) write_json_file(*be_json, j);
      print_summary(j);
    };
  });

  // ---- prune ----
  auto* prune = app.add_subcommand("prune", "mask to transformer token keep-set");
  auto pr_mask = std::make_shared<std::string>();
  auto pr_patch = std::make_shared<int>(8);
  auto pr_dilate = std::make_shared<int>(0);
  auto pr_out = std::make_shared<std::string>();
  prune->add_option("--mask", *pr_mask, "mask .pgm")->required();
  prune->add_option("--patch", *pr_patch, "patch size (px)");
  prune->add_option("--dilate", *pr_dilate, "dilation iterations");
  prune->add_option("--out", *pr_out, "optional token json file");
  prune->callback([=, &action] {
    action = [=] {
      const IMOMask mask = read_mask_pgm(*pr_mask);
      const TokenGrid grid = mask_to_tokens(mask, *pr_patch, *pr_dilate);
      const json j = {{"patch", grid.patch},
                      {"grid", {grid.rows, grid.cols}},
                      {"kept", grid.kept},
                      {"utilization", utilization(grid)}};
      if (!pr_out->empty()) write_json_file(*pr_out, j);
      print_summary(j);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return 1;
  }
  action();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_app(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const evsup::FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
