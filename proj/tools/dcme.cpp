// Copyright 2026 The dcme Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Command-line front end for the displacement-field instance codec:
// synth -> encode -> degrade -> decode -> eval, plus format utilities.
// Exit codes: 0 success, 1 usage error, 2 format/input error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dcme/decode.hpp"
#include "dcme/degrade.hpp"
#include "dcme/encode.hpp"
#include "dcme/eval.hpp"
#include "dcme/grid.hpp"
#include "dcme/io.hpp"
#include "dcme/synth.hpp"

namespace {

using json = nlohmann::ordered_json;

dcme::GridDims parse_dims(const std::string& text) {
  const std::size_t x = text.find('x');
  if (x == std::string::npos || x == 0 || x + 1 >= text.size())
    throw CLI::ValidationError("--dims", "expected <height>x<width>, e.g. 256x256");
  try {
    const long long h = std::stoll(text.substr(0, x));
    const long long w = std::stoll(text.substr(x + 1));
    if (h < 1 || w < 1) throw std::invalid_argument("non-positive");
    return dcme::GridDims{h, w};
  } catch (const std::exception&) {
    throw CLI::ValidationError("--dims", "expected <height>x<width>, e.g. 256x256");
  }
}

void write_json(const std::string& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << j.dump(2) << "\n";
}

json params_json(const dcme::DecodeParams& p, const std::string& method) {
  return json{{"dt", p.dt},         {"vt", p.vt},   {"et", p.et},
              {"eps_bg", p.eps_bg}, {"r_cm", p.r_cm}, {"method", method}};
}

json instances_json(const std::vector<dcme::DecodedInstance>& instances) {
  json arr = json::array();
  for (const dcme::DecodedInstance& inst : instances) {
    arr.push_back(json{{"label", inst.label},
                       {"x", inst.center.x},
                       {"y", inst.center.y},
                       {"votes", inst.center.votes},
                       {"pixel_count", inst.pixel_count},
                       {"confidence", inst.confidence}});
  }
  return arr;
}

json report_json(const dcme::ApReport& report) {
  json per_class = json::object();
  for (const auto& [cls, entry] : report.per_class)
    per_class[std::to_string(cls)] = json{{"ap", entry.ap}, {"ap50", entry.ap50}};
  return json{{"ap", report.ap}, {"ap50", report.ap50}, {"per_class", per_class}};
}

struct SynthArgs {
  std::string spec_path;
  std::string dims_text{"256x256"};
  int shapes{8};
  double size_min{60}, size_max{4000};
  std::uint64_t seed{0};
  double min_sep{-1};  // <0: plain uniform placement
  std::string out;
  std::string classes_out;
  std::string spec_out;
};

dcme::Scene run_synth(const SynthArgs& a, dcme::SceneSpec* spec_used) {
  dcme::SceneSpec spec;
  if (!a.spec_path.empty()) {
    std::ifstream is(a.spec_path);
    if (!is) throw std::runtime_error("cannot open " + a.spec_path);
    spec = dcme::parse_scene_spec(is);
  } else {
    const dcme::GridDims dims = parse_dims(a.dims_text);
    spec = a.min_sep < 0
               ? dcme::random_scene(dims, a.shapes, {a.size_min, a.size_max}, a.seed)
               : dcme::random_separated_scene(dims, a.shapes, {a.size_min, a.size_max},
                                              a.seed, a.min_sep);
  }
  if (spec_used != nullptr) *spec_used = spec;
  dcme::Scene scene = dcme::generate_scene(spec);
  for (dcme::LabelId id : scene.dropped_ids)
    std::cerr << "warning: shape " << id << " rasterized to zero pixels\n";
  return scene;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Instance codec: displacement vector fields pointing at centers of mass"};
  app.require_subcommand(1);

  int exit_code = 0;

  // synth -----------------------------------------------------------------
  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic label map");
  synth_cmd->add_option("--spec", synth.spec_path, "Scene spec file (overrides random flags)");
  synth_cmd->add_option("--dims", synth.dims_text, "Grid dims <height>x<width>")
      ->capture_default_str();
  synth_cmd->add_option("--shapes", synth.shapes, "Number of random shapes")
      ->capture_default_str();
  synth_cmd->add_option("--size-min", synth.size_min, "Min shape area, px")
      ->capture_default_str();
  synth_cmd->add_option("--size-max", synth.size_max, "Max shape area, px")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--min-sep", synth.min_sep,
                        "Keep bounding circles at least this far apart (px)");
  synth_cmd->add_option("-o,--out", synth.out, "Output label map (16-bit PGM)")->required();
  synth_cmd->add_option("--classes", synth.classes_out, "Also write the class map");
  synth_cmd->add_option("--write-spec", synth.spec_out, "Also write the scene spec");
  synth_cmd->callback([&synth] {
    dcme::SceneSpec spec;
    dcme::Scene scene = run_synth(synth, &spec);
    dcme::write_labelmap(std::filesystem::path(synth.out), scene.labels);
    if (!synth.classes_out.empty())
      dcme::write_labelmap(std::filesystem::path(synth.classes_out), scene.classes);
    if (!synth.spec_out.empty()) {
      std::ofstream os(synth.spec_out);
      if (!os) throw std::runtime_error("cannot open " + synth.spec_out + " for writing");
      dcme::write_scene_spec(os, spec);
    }
  });

  // encode ----------------------------------------------------------------
  std::string enc_in, enc_out, enc_anchor{"cm"};
  CLI::App* enc_cmd = app.add_subcommand("encode", "Label map -> displacement vector map");
  enc_cmd->add_option("input", enc_in, "Input label map (16-bit PGM)")->required();
  enc_cmd->add_option("-o,--out", enc_out, "Output vecmap")->required();
  enc_cmd->add_option("--anchor", enc_anchor, "Anchor: cm (center of mass) or bbox")
      ->check(CLI::IsMember({"cm", "bbox"}))
      ->capture_default_str();
  enc_cmd->callback([&] {
    const dcme::LabelMap lm = dcme::read_labelmap(std::filesystem::path(enc_in));
    std::vector<dcme::LabelId> degenerate;
    const auto vm = enc_anchor == "bbox" ? dcme::encode_bbox_centroid(lm, &degenerate)
                                         : dcme::encode(lm, &degenerate);
    for (dcme::LabelId id : degenerate)
      std::cerr << "warning: instance " << id
                << " has a single pixel; encoded as a zero vector\n";
    dcme::write_vecmap(std::filesystem::path(enc_out), vm.cast<float>());
  });

  // degrade ---------------------------------------------------------------
  std::string deg_in, deg_out, deg_mask;
  dcme::NoiseSpec noise;
  CLI::App* deg_cmd = app.add_subcommand("degrade", "Add seeded noise/blur to a vecmap");
  deg_cmd->add_option("input", deg_in, "Input vecmap")->required();
  deg_cmd->add_option("-o,--out", deg_out, "Output vecmap")->required();
  deg_cmd->add_option("--sigma-fg", noise.sigma_fg, "Gaussian sigma on foreground")
      ->capture_default_str();
  deg_cmd->add_option("--sigma-bg", noise.sigma_bg, "Gaussian sigma on background")
      ->capture_default_str();
  deg_cmd->add_option("--blur", noise.blur_radius, "Box blur radius")->capture_default_str();
  deg_cmd->add_option("--seed", noise.seed, "Noise seed")->capture_default_str();
  deg_cmd->add_option("--fg-from", deg_mask,
                      "Label map defining foreground (default: nonzero vectors)");
  deg_cmd->callback([&] {
    const dcme::VectorMap vm = dcme::read_vecmap(std::filesystem::path(deg_in));
    dcme::Mask mask;
    if (deg_mask.empty()) {
      mask = dcme::nonzero_mask(vm);
    } else {
      const dcme::LabelMap lm = dcme::read_labelmap(std::filesystem::path(deg_mask));
      mask = lm != dcme::LabelId{0};
    }
    dcme::write_vecmap(std::filesystem::path(deg_out), dcme::degrade(vm, mask, noise));
  });

  // decode ----------------------------------------------------------------
  std::string dec_in, dec_out, dec_report, dec_method{"assign"};
  dcme::DecodeParams dec_params;
  CLI::App* dec_cmd = app.add_subcommand("decode", "Vecmap -> instance label map");
  dec_cmd->add_option("input", dec_in, "Input vecmap")->required();
  dec_cmd->add_option("-o,--out", dec_out, "Output label map (16-bit PGM)")->required();
  dec_cmd->add_option("--dt", dec_params.dt, "Cluster distance threshold")
      ->capture_default_str();
  dec_cmd->add_option("--vt", dec_params.vt, "Vote threshold")->capture_default_str();
  dec_cmd->add_option("--et", dec_params.et, "Assignment error threshold")
      ->capture_default_str();
  dec_cmd->add_option("--eps-bg", dec_params.eps_bg, "Background magnitude threshold")
      ->capture_default_str();
  dec_cmd->add_option("--r-cm", dec_params.r_cm, "Sub-epsilon rescue radius")
      ->capture_default_str();
  dec_cmd->add_option("--method", dec_method, "assign or watershed")
      ->check(CLI::IsMember({"assign", "watershed"}))
      ->capture_default_str();
  dec_cmd->add_option("--report", dec_report, "Write per-instance JSON report");
  dec_cmd->callback([&] {
    const dcme::VectorMap vm = dcme::read_vecmap(std::filesystem::path(dec_in));
    const dcme::DecodeResult res = dec_method == "watershed"
                                       ? dcme::decode_watershed(vm, dec_params)
                                       : dcme::decode(vm, dec_params);
    dcme::write_labelmap(std::filesystem::path(dec_out), res.labels);
    if (!dec_report.empty()) {
      json j{{"dims", {{"height", vm.rows()}, {"width", vm.cols()}}},
             {"params", params_json(dec_params, dec_method)},
             {"n_instances", res.instances.size()},
             {"instances", instances_json(res.instances)}};
      write_json(dec_report, j);
    }
    std::cout << res.instances.size() << " instances\n";
  });

  // magview ---------------------------------------------------------------
  std::string mag_in, mag_out;
  CLI::App* mag_cmd = app.add_subcommand("magview", "Vecmap -> 8-bit magnitude image");
  mag_cmd->add_option("input", mag_in, "Input vecmap")->required();
  mag_cmd->add_option("-o,--out", mag_out, "Output 8-bit PGM")->required();
  mag_cmd->callback([&] {
    const dcme::VectorMap vm = dcme::read_vecmap(std::filesystem::path(mag_in));
    dcme::write_gray8(std::filesystem::path(mag_out),
                      dcme::export_magnitude_image(dcme::magnitude_map(vm).eval()));
  });

  // resample --------------------------------------------------------------
  std::string res_in, res_out, res_target;
  std::int64_t res_factor{1};
  bool res_up{false};
  CLI::App* res_cmd = app.add_subcommand("resample", "Nearest-neighbor label map resampling");
  res_cmd->add_option("input", res_in, "Input label map (16-bit PGM)")->required();
  res_cmd->add_option("-o,--out", res_out, "Output label map")->required();
  res_cmd->add_option("--factor", res_factor, "Integer factor")->capture_default_str();
  res_cmd->add_flag("--up", res_up, "Upsample instead of subsample");
  res_cmd->add_option("--target-dims", res_target, "Fit output to <height>x<width>");
  res_cmd->callback([&] {
    const dcme::LabelMap lm = dcme::read_labelmap(std::filesystem::path(res_in));
    dcme::LabelMap out;
    if (res_target.empty()) {
      out = res_up ? dcme::upsample_nearest(lm, res_factor)
                   : dcme::subsample_nearest(lm, res_factor);
    } else {
      const dcme::GridDims target = parse_dims(res_target);
      out = res_up ? dcme::upsample_nearest(lm, res_factor, target)
                   : dcme::subsample_nearest(lm, res_factor, target);
    }
    dcme::write_labelmap(std::filesystem::path(res_out), out);
  });

  // eval ------------------------------------------------------------------
  std::string ev_pred, ev_gt, ev_pred_classes, ev_gt_classes, ev_pred_report, ev_out;
  std::vector<double> ev_thresholds;
  CLI::App* ev_cmd = app.add_subcommand("eval", "Average precision of pred vs gt label maps");
  ev_cmd->add_option("pred", ev_pred, "Predicted label map")->required();
  ev_cmd->add_option("gt", ev_gt, "Ground-truth label map")->required();
  ev_cmd->add_option("--pred-classes", ev_pred_classes, "Class map for predictions");
  ev_cmd->add_option("--gt-classes", ev_gt_classes, "Class map for ground truth");
  ev_cmd->add_option("--pred-report", ev_pred_report,
                     "decode --report JSON; attaches per-instance confidences");
  ev_cmd->add_option("--thresholds", ev_thresholds, "IoU thresholds (default 0.50..0.95)");
  ev_cmd->add_option("-o,--out", ev_out, "Write the JSON report here");
  ev_cmd->callback([&] {
    const dcme::LabelMap pred = dcme::read_labelmap(std::filesystem::path(ev_pred));
    const dcme::LabelMap gt = dcme::read_labelmap(std::filesystem::path(ev_gt));
    std::optional<dcme::LabelMap> pred_cls, gt_cls;
    if (!ev_pred_classes.empty())
      pred_cls = dcme::read_labelmap(std::filesystem::path(ev_pred_classes));
    if (!ev_gt_classes.empty())
      gt_cls = dcme::read_labelmap(std::filesystem::path(ev_gt_classes));
    std::vector<dcme::EvalInstance> preds =
        dcme::instances_from_label_map(pred, pred_cls ? &*pred_cls : nullptr);
    const std::vector<dcme::EvalInstance> gts =
        dcme::instances_from_label_map(gt, gt_cls ? &*gt_cls : nullptr);
    if (!ev_pred_report.empty()) {
      std::ifstream is(ev_pred_report);
      if (!is) throw std::runtime_error("cannot open " + ev_pred_report);
      json j = json::parse(is, nullptr, true);
      std::map<int, double> conf;
      for (const auto& inst : j.at("instances"))
        conf[inst.at("label").get<int>()] = inst.at("confidence").get<double>();
      for (dcme::EvalInstance& p : preds) {
        auto it = conf.find(p.source_label);
        if (it != conf.end()) p.confidence = it->second;
      }
    }
    const dcme::ApReport report =
        ev_thresholds.empty() ? dcme::average_precision(preds, gts)
                              : dcme::average_precision(preds, gts, ev_thresholds);
    json j = report_json(report);
    j["n_pred"] = preds.size();
    j["n_gt"] = gts.size();
    std::cout << j.dump(2) << "\n";
    if (!ev_out.empty()) write_json(ev_out, j);
  });

  // import-cityscapes -------------------------------------------------------
  std::string cs_in, cs_out, cs_classes;
  CLI::App* cs_cmd = app.add_subcommand(
      "import-cityscapes", "Split a class*1000+instance id raster into label and class maps");
  cs_cmd->add_option("input", cs_in, "16-bit id raster (PGM)")->required();
  cs_cmd->add_option("-o,--out", cs_out, "Output label map")->required();
  cs_cmd->add_option("--classes", cs_classes, "Output class map");
  cs_cmd->callback([&] {
    const dcme::LabelMap raw = dcme::read_labelmap(std::filesystem::path(cs_in));
    const dcme::CityscapesImport imported = dcme::import_cityscapes_ids(raw);
    dcme::write_labelmap(std::filesystem::path(cs_out), imported.labels);
    if (!cs_classes.empty())
      dcme::write_labelmap(std::filesystem::path(cs_classes), imported.classes);
  });

  // roundtrip ---------------------------------------------------------------
  SynthArgs rt_synth;
  rt_synth.min_sep = 8.0;
  dcme::NoiseSpec rt_noise;
  dcme::DecodeParams rt_params;
  std::string rt_method{"assign"}, rt_out, rt_keep;
  CLI::App* rt_cmd =
      app.add_subcommand("roundtrip", "synth -> encode -> [degrade] -> decode -> eval");
  rt_cmd->add_option("--spec", rt_synth.spec_path, "Scene spec file");
  rt_cmd->add_option("--dims", rt_synth.dims_text, "Grid dims")->capture_default_str();
  rt_cmd->add_option("--shapes", rt_synth.shapes, "Number of shapes")->capture_default_str();
  rt_cmd->add_option("--size-min", rt_synth.size_min, "Min shape area")->capture_default_str();
  rt_cmd->add_option("--size-max", rt_synth.size_max, "Max shape area")->capture_default_str();
  rt_cmd->add_option("--seed", rt_synth.seed, "Scene + noise seed")->capture_default_str();
  rt_cmd->add_option("--min-sep", rt_synth.min_sep, "Bounding-circle separation, px")
      ->capture_default_str();
  rt_cmd->add_option("--sigma-fg", rt_noise.sigma_fg, "Noise sigma on foreground")
      ->capture_default_str();
  rt_cmd->add_option("--sigma-bg", rt_noise.sigma_bg, "Noise sigma on background")
      ->capture_default_str();
  rt_cmd->add_option("--blur", rt_noise.blur_radius, "Box blur radius")->capture_default_str();
  rt_cmd->add_option("--dt", rt_params.dt, "Cluster distance threshold")->capture_default_str();
  rt_cmd->add_option("--vt", rt_params.vt, "Vote threshold")->capture_default_str();
  rt_cmd->add_option("--et", rt_params.et, "Assignment error threshold")->capture_default_str();
  rt_cmd->add_option("--eps-bg", rt_params.eps_bg, "Background magnitude threshold")
      ->capture_default_str();
  rt_cmd->add_option("--r-cm", rt_params.r_cm, "Sub-epsilon rescue radius")
      ->capture_default_str();
  rt_cmd->add_option("--method", rt_method, "assign or watershed")
      ->check(CLI::IsMember({"assign", "watershed"}))
      ->capture_default_str();
  rt_cmd->add_option("-o,--out", rt_out, "Write the JSON report here");
  rt_cmd->add_option("--keep-dir", rt_keep, "Keep intermediate files in this directory");
  rt_cmd->callback([&] {
    rt_noise.seed = rt_synth.seed;
    dcme::SceneSpec spec;
    const dcme::Scene scene = run_synth(rt_synth, &spec);
    auto vm = dcme::encode(scene.labels);
    const bool degraded =
        rt_noise.sigma_fg > 0 || rt_noise.sigma_bg > 0 || rt_noise.blur_radius > 0;
    if (degraded) {
      const dcme::Mask mask = scene.labels != dcme::LabelId{0};
      vm = dcme::degrade(vm, mask, rt_noise);
    }
    const dcme::DecodeResult res = rt_method == "watershed"
                                       ? dcme::decode_watershed(vm, rt_params)
                                       : dcme::decode(vm, rt_params);
    std::vector<dcme::EvalInstance> preds = dcme::instances_from_label_map(res.labels);
    for (dcme::EvalInstance& p : preds)
      p.confidence = res.instances[static_cast<std::size_t>(p.source_label - 1)].confidence;
    const std::vector<dcme::EvalInstance> gts =
        dcme::instances_from_label_map(scene.labels);
    const dcme::ApReport report = dcme::average_precision(preds, gts);
    json j{{"scene_seed", rt_synth.seed},
           {"params", params_json(rt_params, rt_method)},
           {"n_gt", gts.size()},
           {"n_pred", preds.size()},
           {"ap", report.ap},
           {"ap50", report.ap50},
           {"pixel_accuracy", dcme::pixel_accuracy(res.labels, scene.labels)}};
    j["params"]["sigma_fg"] = rt_noise.sigma_fg;
    j["params"]["sigma_bg"] = rt_noise.sigma_bg;
    j["params"]["blur"] = rt_noise.blur_radius;
    std::cout << j.dump(2) << "\n";
    if (!rt_out.empty()) write_json(rt_out, j);
    if (!rt_keep.empty()) {
      const std::filesystem::path dir(rt_keep);
      std::filesystem::create_directories(dir);
      dcme::write_labelmap(dir / "gt_labels.pgm", scene.labels);
      dcme::write_labelmap(dir / "gt_classes.pgm", scene.classes);
      dcme::write_vecmap(dir / "encoded.vecmap", vm.cast<float>());
      dcme::write_labelmap(dir / "decoded.pgm", res.labels);
      std::ofstream os(dir / "scene.spec");
      dcme::write_scene_spec(os, spec);
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const dcme::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return exit_code;
}
