#include "crowdpose/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "crowdpose/annotations.hpp"
#include "crowdpose/augment.hpp"
#include "crowdpose/crowd_metrics.hpp"
#include "crowdpose/errors.hpp"
#include "crowdpose/evaluator.hpp"
#include "crowdpose/heatmaps.hpp"
#include "crowdpose/manifest.hpp"
#include "crowdpose/occloss.hpp"
#include "crowdpose/parallel.hpp"
#include "crowdpose/synthgen.hpp"

namespace crowdpose {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, std::string_view data) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << data;
}

DatasetFormat detect_format(std::string_view bytes) {
  const json doc = json::parse(bytes, nullptr, false);
  if (doc.is_discarded()) return DatasetFormat::Native;  // let the parser report the offset
  const auto is_rows = [](const json& a) { return a.is_array() && !a.empty() && a.front().is_array(); };
  if (doc.is_object() && doc.contains("format")) return DatasetFormat::Native;
  if (is_rows(doc)) return DatasetFormat::JtaLike;
  if (doc.is_object() && doc.contains("annotations") && is_rows(doc["annotations"]))
    return DatasetFormat::JtaLike;
  return DatasetFormat::CocoLike;
}

Dataset load_input(const fs::path& path, const std::string& format) {
  const std::string bytes = read_file(path);
  if (format == "auto") return parse_dataset(bytes, detect_format(bytes));
  const auto f = parse_format_name(format);
  if (!f) throw ConfigError("unknown dataset format '" + format + "'");
  return parse_dataset(bytes, *f);
}

std::string safe_name(std::string_view id) {
  std::string s(id);
  for (char& c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  return s;
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

// Shared per-run state: options recorded in the manifest and where it goes.
struct Run {
  RunManifest manifest;
  std::string manifest_path;
  unsigned jobs = 1;
  std::vector<fs::path> outputs;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  fs::path resolve_manifest(const fs::path& primary_output, bool output_is_dir) const {
    if (!manifest_path.empty()) return manifest_path;
    if (primary_output.empty()) return fs::path(std::string(kToolName) + ".manifest.json");
    if (output_is_dir) return primary_output / "manifest.json";
    return fs::path(primary_output.string() + ".manifest.json");
  }

  void finish(const fs::path& primary_output, bool output_is_dir, int code) {
    const fs::path where = resolve_manifest(primary_output, output_is_dir);
    manifest.exit_code = code;
    if (code == kExitOk || manifest.error.empty())
      for (const auto& o : outputs) manifest.add_output(o, where);
    manifest.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest.write(where);
  }
};

void add_common(CLI::App* sub, Run& run) {
  sub->add_option("--jobs", run.jobs, "Data-parallel width (outputs do not depend on it)")
      ->check(CLI::Range(1u, 1024u));
  sub->add_option("--manifest", run.manifest_path, "Where to write the run manifest");
}

struct ConvertArgs {
  std::string from, to = "crowdpose", in, out, mapping;
};

void run_convert(const ConvertArgs& a, Run& run) {
  const auto from = parse_format_name(a.from);
  if (!from) throw ConfigError("unknown input format '" + a.from + "'");
  run.manifest.options = {{"from", a.from}, {"to", a.to}};
  run.manifest.add_input(a.in);
  Dataset ds = load_dataset(a.in, *from);
  if (a.to == "crowdpose") {
    if (!a.mapping.empty()) {
      run.manifest.add_input(a.mapping);
      ds = convert_dataset(ds, load_mapping(a.mapping));
    } else if (ds.schema.name != crowdpose_schema().name) {
      ds = convert_dataset(ds, mapping_by_name(ds.schema, crowdpose_schema()));
    }
  } else if (a.to != "native") {
    throw ConfigError("unknown target '" + a.to + "' (expected crowdpose or native)");
  }
  save_dataset(a.out, ds);
  run.outputs.push_back(a.out);
}

struct ValidateArgs {
  std::string in, format = "auto", out;
  bool strict = false;
};

int run_validate(const ValidateArgs& a, Run& run, std::ostream& out, std::ostream& err) {
  run.manifest.options = {{"format", a.format}, {"strict", a.strict}};
  run.manifest.add_input(a.in);
  const ValidationReport report = validate(load_input(a.in, a.format));
  json j = report.to_json();
  if (a.out.empty()) {
    out << j.dump(2) << "\n";
  } else {
    write_json(a.out, j);
    run.outputs.push_back(a.out);
  }
  for (const auto& [kind, n] : report.counts()) err << kind << ": " << n << "\n";
  return a.strict && !report.ok() ? kExitDomainError : kExitOk;
}

struct AnalyzeArgs {
  std::string in, format = "auto", out, counting = "all";
  std::size_t bins = 10;
};

CountingMode parse_counting(const std::string& s) {
  if (s == "all") return CountingMode::AllLabeled;
  if (s == "visible") return CountingMode::VisibleOnly;
  throw ConfigError("unknown counting mode '" + s + "' (expected all or visible)");
}

void run_analyze(const AnalyzeArgs& a, Run& run, std::ostream& out, std::ostream& err) {
  run.manifest.options = {{"format", a.format}, {"bins", a.bins}, {"counting", a.counting}};
  run.manifest.add_input(a.in);
  const CrowdIndexStats stats = dataset_histogram(load_input(a.in, a.format), a.bins, parse_counting(a.counting));
  if (stats.warnings) err << stats.warnings << " person(s) without own keypoints in their box\n";
  if (!stats.skipped.empty()) err << stats.skipped.size() << " image(s) without persons skipped\n";
  if (a.out.empty()) {
    out << stats.to_json().dump(2) << "\n";
  } else {
    write_json(a.out, stats.to_json());
    run.outputs.push_back(a.out);
  }
}

struct GenArgs {
  std::size_t scenes = 100;
  std::string target = "uniform", out, config, inventory_out;
  std::uint64_t seed = 0;
  std::size_t bins = 10;
  double tolerance = 0.03;
  std::size_t inventory_objects = 64;
  bool no_rasters = false;
};

void apply_scene_config(SceneConfig& sc, const json& j) {
  for (const auto& [key, value] : j.items()) {
    if (key == "image_w") sc.image_w = value.get<int>();
    else if (key == "image_h") sc.image_h = value.get<int>();
    else if (key == "min_persons") sc.min_persons = value.get<int>();
    else if (key == "max_persons") sc.max_persons = value.get<int>();
    else if (key == "min_height") sc.min_height = value.get<double>();
    else if (key == "max_height") sc.max_height = value.get<double>();
    else if (key == "limb_radius_frac") sc.limb_radius_frac = value.get<double>();
    else if (key == "depth_model") {
      const auto m = value.get<std::string>();
      if (m == "uniform_z") sc.depth_model = DepthModel::UniformZ;
      else if (m == "ground_plane") sc.depth_model = DepthModel::GroundPlane;
      else throw ConfigError("unknown depth_model '" + m + "'");
    } else {
      throw ConfigError("unknown scene option '" + key + "'");
    }
  }
}

void run_gen(const GenArgs& a, Run& run, std::ostream& err) {
  CorpusConfig cfg;
  cfg.scenes = a.scenes;
  cfg.bins = a.bins;
  cfg.tolerance = a.tolerance;
  cfg.jobs = run.jobs;
  run.manifest.seed = a.seed;
  run.manifest.options = {{"scenes", a.scenes},     {"target", a.target},
                          {"bins", a.bins},         {"tolerance", a.tolerance},
                          {"rasters", !a.no_rasters}};
  if (a.target == "uniform") {
  } else if (a.target == "easy") {
    cfg.target_histogram.assign(a.bins, 0.0);
    cfg.target_histogram[0] = 1.0;
  } else {
    run.manifest.add_input(a.target);
    const json j = json::parse(read_file(a.target));
    const json& w = j.is_object() ? j.at("weights") : j;
    cfg.target_histogram = w.get<std::vector<double>>();
    run.manifest.options["target"] = "file";
  }
  if (!a.config.empty()) {
    run.manifest.add_input(a.config);
    apply_scene_config(cfg.scene, json::parse(read_file(a.config)));
  }
  const Corpus corpus = generate_corpus(a.seed, cfg);
  err << "accepted " << corpus.scenes.size() << " of " << corpus.candidates << " candidates\n";
  write_corpus(a.out, corpus, !a.no_rasters);
  run.outputs.push_back(a.out);
  if (!a.inventory_out.empty()) {
    Rng rng = Rng::substream(a.seed, "inventory");
    save_inventory(a.inventory_out, build_inventory(rng, corpus.scenes, a.inventory_objects));
    run.outputs.push_back(a.inventory_out);
    run.manifest.options["inventory_objects"] = a.inventory_objects;
  }
}

struct AugmentArgs {
  std::string method, inventory, in, out, format = "auto", size_mode = "area";
  std::uint64_t seed = 0;
  double area_min = 0.08, area_max = 0.70, or_probability = 0.5;
  bool blank_canvas = false;
};

void run_augment(const AugmentArgs& a, Run& run) {
  AugmentConfig cfg;
  const auto method = parse_augment_method(a.method);
  if (!method) throw ConfigError("unknown augmentation method '" + a.method + "'");
  cfg.method = *method;
  cfg.seed = a.seed;
  cfg.area_frac_min = a.area_min;
  cfg.area_frac_max = a.area_max;
  cfg.or_probability = a.or_probability;
  if (a.size_mode == "area") cfg.size_mode = SizeMode::Area;
  else if (a.size_mode == "linear") cfg.size_mode = SizeMode::Linear;
  else throw ConfigError("unknown size mode '" + a.size_mode + "'");
  cfg.check();
  run.manifest.seed = a.seed;
  run.manifest.options = {{"method", a.method},           {"format", a.format},
                          {"area_min", a.area_min},       {"area_max", a.area_max},
                          {"or_probability", a.or_probability}, {"size_mode", a.size_mode},
                          {"blank_canvas", a.blank_canvas}};

  const CutoutInventory inventory = load_inventory(a.inventory);
  run.manifest.add_input(a.inventory);
  run.manifest.add_input(a.in);
  const Dataset ds = load_input(a.in, a.format);
  const fs::path base = fs::path(a.in).parent_path();

  std::vector<fs::path> sources(ds.images.size());
  for (std::size_t i = 0; i < ds.images.size(); ++i) {
    const auto& src = ds.images[i].source;
    if (a.blank_canvas || !src) continue;
    sources[i] = base / *src;
    if (!fs::exists(sources[i])) throw IoError("image source not found: " + sources[i].string());
  }

  const fs::path out_dir = a.out;
  fs::create_directories(out_dir / "images");
  Dataset result = ds;
  std::vector<json> logs(ds.images.size());
  parallel_for(ds.images.size(), run.jobs, [&](std::size_t i) {
    const ImageRecord& rec = ds.images[i];
    const RasterImage canvas =
        sources[i].empty() ? RasterImage(rec.width, rec.height) : read_image(sources[i]);
    if (canvas.width != rec.width || canvas.height != rec.height)
      throw DimensionError("image " + sources[i].string() + " does not match its record size");
    ImageAugmentation aug{canvas, rec, {}};
    if (cfg.method != AugmentMethod::None) aug = augment_image(canvas, rec, cfg, inventory);
    const std::string file = "images/" + safe_name(rec.id) + ".pam";
    write_pam(out_dir / file, aug.image);
    aug.record.source = file;
    json entry = json::array();
    for (const auto& log : aug.logs) entry.push_back(log.to_json());
    logs[i] = std::move(entry);
    result.images[i] = std::move(aug.record);
  });

  json log_doc = json::object();
  for (std::size_t i = 0; i < ds.images.size(); ++i) log_doc[ds.images[i].id] = std::move(logs[i]);
  save_dataset(out_dir / "annotations.json", result);
  write_file(out_dir / "augment_log.json", log_doc.dump() + "\n");
  run.outputs.push_back(out_dir);
}

struct HeatmapArgs {
  std::string in, out, format = "auto", image_id;
  std::size_t person = 0;
  double sigma = kDefaultSigma;
  std::vector<double> bbox;
  double threshold = kDefaultConfidenceThreshold;
};

void run_heatmap_encode(const HeatmapArgs& a, Run& run) {
  run.manifest.options = {{"format", a.format}, {"image_id", a.image_id}, {"person", a.person},
                          {"sigma", a.sigma}};
  run.manifest.add_input(a.in);
  const Dataset ds = load_input(a.in, a.format);
  const ImageRecord* rec = a.image_id.empty() ? (ds.images.empty() ? nullptr : &ds.images.front())
                                              : ds.find(a.image_id);
  if (!rec) throw ConfigError("image '" + a.image_id + "' not found in " + a.in);
  if (a.person >= rec->persons.size())
    throw ConfigError("image '" + rec->id + "' has " + std::to_string(rec->persons.size()) +
                      " person(s); index " + std::to_string(a.person) + " requested");
  const PersonInstance& p = rec->persons[a.person];
  write_heatmaps(a.out, encode(p.pose, bbox_to_crop(p.bbox), a.sigma));
  run.outputs.push_back(a.out);
}

void run_heatmap_decode(const HeatmapArgs& a, Run& run, std::ostream& out) {
  run.manifest.options = {{"bbox", a.bbox}, {"threshold", a.threshold}};
  run.manifest.add_input(a.in);
  const BBox box{a.bbox[0], a.bbox[1], a.bbox[2], a.bbox[3]};
  const DecodedPose d = decode(read_heatmaps(a.in), bbox_to_crop(box), a.threshold);
  json kps = json::array();
  for (std::size_t k = 0; k < d.pose.size(); ++k) {
    const Keypoint& kp = d.pose.keypoints[k];
    kps.push_back({{"x", kp.x},
                   {"y", kp.y},
                   {"visibility", to_string(kp.vis)},
                   {"confidence", d.confidence[k]},
                   {"low_confidence", static_cast<bool>(d.low_confidence[k])}});
  }
  const json j = {{"keypoints", kps}};
  if (a.out.empty()) {
    out << j.dump(2) << "\n";
  } else {
    write_json(a.out, j);
    run.outputs.push_back(a.out);
  }
}

struct LossCheckArgs {
  double alpha = kDefaultAlpha, fd_step = 1e-4, tolerance = 1e-5;
  int trials = 100;
  std::uint64_t seed = 0;
  std::string norm = "mse", out;
};

int run_losscheck(const LossCheckArgs& a, Run& run, std::ostream& out) {
  LossConfig cfg;
  cfg.alpha = a.alpha;
  if (a.norm == "mse") cfg.norm = NormMode::Mse;
  else if (a.norm == "l2") cfg.norm = NormMode::L2Norm;
  else throw ConfigError("unknown norm '" + a.norm + "' (expected mse or l2)");
  run.manifest.seed = a.seed;
  run.manifest.options = {{"alpha", a.alpha}, {"trials", a.trials}, {"norm", a.norm},
                          {"fd_step", a.fd_step}, {"tolerance", a.tolerance}};
  const double err = grad_check(cfg, a.trials, a.fd_step, a.seed);
  const bool pass = err < a.tolerance;
  out << "max_relative_error " << err << "\n" << (pass ? "PASS" : "FAIL") << "\n";
  if (!a.out.empty()) {
    write_json(a.out, {{"max_relative_error", err}, {"tolerance", a.tolerance}, {"pass", pass}});
    run.outputs.push_back(a.out);
  }
  return pass ? kExitOk : kExitDomainError;
}

struct EvalArgs {
  std::string gt, pred, gt_format = "auto", pred_format = "auto", sigmas, out, csv,
      method = "model", counting = "all";
};

void run_eval(const EvalArgs& a, Run& run) {
  run.manifest.options = {{"gt_format", a.gt_format}, {"pred_format", a.pred_format},
                          {"method", a.method},       {"counting", a.counting}};
  run.manifest.add_input(a.gt);
  run.manifest.add_input(a.pred);
  const Dataset gt = load_input(a.gt, a.gt_format);
  const Dataset pred = load_input(a.pred, a.pred_format);
  OksConfig cfg = OksConfig::defaults(gt.schema.count());
  if (!a.sigmas.empty()) {
    run.manifest.add_input(a.sigmas);
    cfg = load_oks_config(a.sigmas, gt.schema.count());
  }
  EvalOptions options;
  options.counting = parse_counting(a.counting);
  options.jobs = run.jobs;
  const EvalReport report = eval_by_crowding(pred, gt, cfg, options);
  write_json(a.out, report.to_json());
  run.outputs.push_back(a.out);
  if (!a.csv.empty()) {
    write_file(a.csv, report.to_csv(a.method));
    run.outputs.push_back(a.csv);
  }
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Crowded-scene pose toolkit", std::string(kToolName)};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  Run run;
  run.manifest.argv.assign(1, std::string(kToolName));
  run.manifest.argv.insert(run.manifest.argv.end(), args.begin(), args.end());

  ConvertArgs conv;
  auto* c = app.add_subcommand("convert", "Convert annotations to native JSON");
  c->add_option("--from", conv.from, "coco, jta or native")->required();
  c->add_option("--to", conv.to, "crowdpose (remap keypoints) or native (keep schema)");
  c->add_option("--mapping", conv.mapping, "JSON mapping: one source index per target keypoint");
  c->add_option("--in", conv.in)->required();
  c->add_option("--out", conv.out)->required();
  add_common(c, run);

  ValidateArgs val;
  auto* v = app.add_subcommand("validate", "Report schema and geometry violations");
  v->add_option("--in", val.in)->required();
  v->add_option("--format", val.format, "auto, coco, jta or native");
  v->add_option("--out", val.out, "Report file (default: standard output)");
  v->add_flag("--strict", val.strict, "Exit 1 when any violation is found");
  add_common(v, run);

  AnalyzeArgs an;
  auto* z = app.add_subcommand("analyze", "CrowdIndex statistics");
  z->add_option("--in", an.in)->required();
  z->add_option("--format", an.format);
  z->add_option("--bins", an.bins)->check(CLI::PositiveNumber);
  z->add_option("--counting", an.counting, "all or visible");
  z->add_option("--out", an.out, "stats.json (default: standard output)");
  add_common(z, run);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic crowd corpus");
  g->add_option("--scenes", gen.scenes)->check(CLI::PositiveNumber);
  g->add_option("--target", gen.target, "uniform, easy, or a JSON file of bin weights");
  g->add_option("--seed", gen.seed);
  g->add_option("--out", gen.out)->required();
  g->add_option("--bins", gen.bins)->check(CLI::PositiveNumber);
  g->add_option("--tolerance", gen.tolerance);
  g->add_option("--config", gen.config, "JSON scene options");
  g->add_option("--inventory-out", gen.inventory_out, "Also write a cutout inventory here");
  g->add_option("--inventory-objects", gen.inventory_objects);
  g->add_flag("--no-rasters", gen.no_rasters, "Skip image and depth rasters");
  add_common(g, run);

  AugmentArgs aug;
  auto* a = app.add_subcommand("augment", "Apply cutout occlusion augmentation");
  a->add_option("--method", aug.method)->required();
  a->add_option("--seed", aug.seed);
  a->add_option("--inventory", aug.inventory)->required();
  a->add_option("--in", aug.in)->required();
  a->add_option("--out", aug.out)->required();
  a->add_option("--format", aug.format);
  a->add_option("--area-min", aug.area_min);
  a->add_option("--area-max", aug.area_max);
  a->add_option("--or-probability", aug.or_probability);
  a->add_option("--size-mode", aug.size_mode, "area or linear");
  a->add_flag("--blank-canvas", aug.blank_canvas, "Ignore image sources and paste onto blank canvases");
  add_common(a, run);

  HeatmapArgs hm;
  auto* h = app.add_subcommand("heatmap", "Encode or decode dual-branch heatmaps");
  h->require_subcommand(1);
  auto* he = h->add_subcommand("encode", "Encode one person's pose");
  he->add_option("--in", hm.in)->required();
  he->add_option("--out", hm.out)->required();
  he->add_option("--format", hm.format);
  he->add_option("--image-id", hm.image_id, "Default: first image");
  he->add_option("--person", hm.person);
  he->add_option("--sigma", hm.sigma);
  add_common(he, run);
  auto* hd = h->add_subcommand("decode", "Decode a heatmap dump to image coordinates");
  hd->add_option("--in", hm.in)->required();
  hd->add_option("--bbox", hm.bbox, "Person box x y w h used for encoding")->expected(4)->required();
  hd->add_option("--threshold", hm.threshold);
  hd->add_option("--out", hm.out, "Pose JSON (default: standard output)");
  add_common(hd, run);

  LossCheckArgs lc;
  auto* l = app.add_subcommand("losscheck", "Finite-difference check of the loss gradient");
  l->add_option("--alpha", lc.alpha);
  l->add_option("--trials", lc.trials);
  l->add_option("--seed", lc.seed);
  l->add_option("--norm", lc.norm, "mse or l2");
  l->add_option("--fd-step", lc.fd_step);
  l->add_option("--tolerance", lc.tolerance);
  l->add_option("--out", lc.out);
  add_common(l, run);

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Keypoint AP by crowding level");
  e->add_option("--gt", ev.gt)->required();
  e->add_option("--pred", ev.pred)->required();
  e->add_option("--gt-format", ev.gt_format);
  e->add_option("--pred-format", ev.pred_format);
  e->add_option("--sigmas", ev.sigmas, "JSON per-keypoint sigmas");
  e->add_option("--out", ev.out)->required();
  e->add_option("--csv", ev.csv, "Also write a one-row CSV table");
  e->add_option("--method", ev.method, "Row label in the CSV table");
  e->add_option("--counting", ev.counting, "all or visible");
  add_common(e, run);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    if (ex.get_exit_code() == 0) {
      out << (dynamic_cast<const CLI::CallForVersion*>(&ex) ? std::string(kToolVersion) + "\n"
                                                              : app.help());
      return kExitOk;
    }
    err << kToolName << ": " << ex.what() << "\n";
    err << "run '" << kToolName << " --help' for usage\n";
    return kExitUsage;
  }

  int code = kExitOk;
  fs::path primary;
  bool primary_is_dir = false;
  try {
    if (c->parsed()) {
      run.manifest.command = "convert";
      run_convert(conv, run);
      primary = conv.out;
    } else if (v->parsed()) {
      run.manifest.command = "validate";
      code = run_validate(val, run, out, err);
      primary = val.out;
    } else if (z->parsed()) {
      run.manifest.command = "analyze";
      run_analyze(an, run, out, err);
      primary = an.out;
    } else if (g->parsed()) {
      run.manifest.command = "gen";
      run_gen(gen, run, err);
      primary = gen.out;
      primary_is_dir = true;
    } else if (a->parsed()) {
      run.manifest.command = "augment";
      run_augment(aug, run);
      primary = aug.out;
      primary_is_dir = true;
    } else if (he->parsed()) {
      run.manifest.command = "heatmap encode";
      run_heatmap_encode(hm, run);
      primary = hm.out;
    } else if (hd->parsed()) {
      run.manifest.command = "heatmap decode";
      run_heatmap_decode(hm, run, out);
      primary = hm.out;
    } else if (l->parsed()) {
      run.manifest.command = "losscheck";
      code = run_losscheck(lc, run, out);
      primary = lc.out;
    } else if (e->parsed()) {
      run.manifest.command = "eval";
      run_eval(ev, run);
      primary = ev.out;
    }
  } catch (const std::exception& ex) {
    err << kToolName << ": " << ex.what() << "\n";
    run.manifest.error = ex.what();
    code = kExitDomainError;
  }
  try {
    run.finish(primary, primary_is_dir, code);
  } catch (const std::exception& ex) {
    err << kToolName << ": cannot write manifest: " << ex.what() << "\n";
    code = kExitDomainError;
  }
  return code;
}

}  // namespace crowdpose
