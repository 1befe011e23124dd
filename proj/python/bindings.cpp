#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "crowdpose/annotations.hpp"
#include "crowdpose/cli.hpp"
#include "crowdpose/crowd_metrics.hpp"
#include "crowdpose/errors.hpp"
#include "crowdpose/evaluator.hpp"
#include "crowdpose/heatmaps.hpp"
#include "crowdpose/manifest.hpp"
#include "crowdpose/occloss.hpp"
#include "crowdpose/synthgen.hpp"

namespace py = pybind11;
using namespace crowdpose;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

DatasetFormat format_of(const std::string& name) {
  const auto f = parse_format_name(name);
  if (!f) throw ConfigError("unknown dataset format '" + name + "'");
  return *f;
}

CountingMode counting_of(const std::string& name) {
  if (name == "all") return CountingMode::AllLabeled;
  if (name == "visible") return CountingMode::VisibleOnly;
  throw ConfigError("unknown counting mode '" + name + "' (expected all or visible)");
}

NormMode norm_of(const std::string& name) {
  if (name == "mse") return NormMode::Mse;
  if (name == "l2") return NormMode::L2Norm;
  throw ConfigError("unknown norm '" + name + "' (expected mse or l2)");
}

BBox bbox_of(const std::vector<double>& b) {
  if (b.size() != 4) throw DimensionError("bbox must have 4 values (x, y, w, h)");
  return {b[0], b[1], b[2], b[3]};
}

// (K, 3) rows of x, y, native visibility code.
Pose pose_of(const Array& a) {
  if (a.ndim() != 2 || a.shape(1) != 3) throw DimensionError("keypoints must have shape (K, 3)");
  Pose p;
  auto r = a.unchecked<2>();
  for (py::ssize_t k = 0; k < a.shape(0); ++k)
    p.keypoints.push_back({r(k, 0), r(k, 1), visibility_from_native(static_cast<int>(r(k, 2)))});
  return p;
}

Array array_of(const Pose& p) {
  Array out({static_cast<py::ssize_t>(p.size()), py::ssize_t{3}});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t k = 0; k < p.size(); ++k) {
    w(k, 0) = p.keypoints[k].x;
    w(k, 1) = p.keypoints[k].y;
    w(k, 2) = visibility_to_native(p.keypoints[k].vis);
  }
  return out;
}

Heatmap heatmap_of(const Array& a) {
  if (a.ndim() != 3) throw DimensionError("heatmaps must have shape (K, H, W)");
  Heatmap h(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)), static_cast<int>(a.shape(2)));
  std::copy(a.data(), a.data() + a.size(), h.values.begin());
  return h;
}

Array array_of(const Heatmap& h) {
  Array out({h.keypoints, h.height, h.width});
  std::copy(h.values.begin(), h.values.end(), out.mutable_data());
  return out;
}

HeatmapPair pair_of(const Array& visible, const Array& occluded) {
  HeatmapPair p;
  p.visible = heatmap_of(visible);
  p.occluded = heatmap_of(occluded);
  if (!p.visible.same_shape(p.occluded)) throw DimensionError("branch shapes differ");
  p.in_bounds.assign(static_cast<std::size_t>(p.visible.keypoints), true);
  return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of crowdpose_kit";
  m.attr("__version__") = std::string(kToolVersion);
  py::register_exception<Error>(m, "CrowdPoseError", PyExc_ValueError);

  m.def(
      "parse_dataset",
      [](const std::string& text, const std::string& format) {
        return serialize_native(parse_dataset(text, format_of(format)));
      },
      py::arg("text"), py::arg("format") = "native",
      "Parse COCO-like, JTA-like or native JSON; returns canonical native JSON.");
  m.def(
      "convert_to_crowdpose",
      [](const std::string& text, const std::string& format) {
        const Dataset ds = parse_dataset(text, format_of(format));
        return serialize_native(convert_dataset(ds, mapping_by_name(ds.schema, crowdpose_schema())));
      },
      py::arg("text"), py::arg("format") = "jta");
  m.def(
      "validate",
      [](const std::string& text, const std::string& format) {
        return validate(parse_dataset(text, format_of(format))).to_json().dump();
      },
      py::arg("text"), py::arg("format") = "native");

  m.def(
      "crowd_indices",
      [](const std::string& text, const std::string& format, const std::string& counting) {
        const Dataset ds = parse_dataset(text, format_of(format));
        std::map<std::string, double> out;
        for (const auto& im : ds.images)
          if (!im.persons.empty()) out[im.id] = crowd_index(im, counting_of(counting)).value;
        return out;
      },
      py::arg("text"), py::arg("format") = "native", py::arg("counting") = "all");
  m.def(
      "crowd_level", [](double c) { return std::string(to_string(partition(c))); }, py::arg("crowd_index"));

  m.def(
      "encode_heatmaps",
      [](const Array& keypoints, const std::vector<double>& bbox, double sigma) {
        const HeatmapPair hp = encode(pose_of(keypoints), bbox_to_crop(bbox_of(bbox)), sigma);
        return py::make_tuple(array_of(hp.visible), array_of(hp.occluded),
                              std::vector<bool>(hp.in_bounds));
      },
      py::arg("keypoints"), py::arg("bbox"), py::arg("sigma") = kDefaultSigma,
      "Returns (visible, occluded, in_bounds); keypoints are (K, 3) rows of x, y, code.");
  m.def(
      "decode_heatmaps",
      [](const Array& visible, const Array& occluded, const std::vector<double>& bbox,
         double threshold) {
        const DecodedPose d = decode(pair_of(visible, occluded), bbox_to_crop(bbox_of(bbox)), threshold);
        return py::make_tuple(array_of(d.pose), d.confidence, std::vector<bool>(d.low_confidence));
      },
      py::arg("visible"), py::arg("occluded"), py::arg("bbox"),
      py::arg("threshold") = kDefaultConfidenceThreshold);

  m.def(
      "loss",
      [](const Array& pv, const Array& po, const Array& gv, const Array& go, double alpha,
         const std::string& norm) {
        LossConfig cfg;
        cfg.alpha = alpha;
        cfg.norm = norm_of(norm);
        return loss(pair_of(pv, po), pair_of(gv, go), cfg).total;
      },
      py::arg("pred_visible"), py::arg("pred_occluded"), py::arg("gt_visible"),
      py::arg("gt_occluded"), py::arg("alpha") = kDefaultAlpha, py::arg("norm") = "mse");
  m.def(
      "loss_grad",
      [](const Array& pv, const Array& po, const Array& gv, const Array& go, double alpha,
         const std::string& norm) {
        LossConfig cfg;
        cfg.alpha = alpha;
        cfg.norm = norm_of(norm);
        const LossGradient g = loss_grad(pair_of(pv, po), pair_of(gv, go), cfg);
        return py::make_tuple(array_of(g.visible), array_of(g.occluded));
      },
      py::arg("pred_visible"), py::arg("pred_occluded"), py::arg("gt_visible"),
      py::arg("gt_occluded"), py::arg("alpha") = kDefaultAlpha, py::arg("norm") = "mse");
  m.def(
      "grad_check",
      [](double alpha, int trials, double fd_step, std::uint64_t seed, const std::string& norm) {
        LossConfig cfg;
        cfg.alpha = alpha;
        cfg.norm = norm_of(norm);
        return grad_check(cfg, trials, fd_step, seed);
      },
      py::arg("alpha") = kDefaultAlpha, py::arg("trials") = 100, py::arg("fd_step") = 1e-4,
      py::arg("seed") = 0, py::arg("norm") = "mse");

  m.def(
      "oks",
      [](const Array& pred, const Array& gt, double area, std::optional<std::vector<double>> sigmas) {
        const Pose g = pose_of(gt);
        OksConfig cfg = OksConfig::defaults(g.size());
        if (sigmas) cfg.sigmas = *sigmas;
        cfg.check();
        return oks(pose_of(pred), g, area, cfg);
      },
      py::arg("pred"), py::arg("gt"), py::arg("area"), py::arg("sigmas") = py::none());
  m.def(
      "evaluate",
      [](const std::string& pred_text, const std::string& gt_text, const std::string& pred_format,
         const std::string& gt_format, const std::string& counting, unsigned jobs) {
        const Dataset gt = parse_dataset(gt_text, format_of(gt_format));
        const Dataset pred = parse_dataset(pred_text, format_of(pred_format));
        EvalOptions options;
        options.counting = counting_of(counting);
        options.jobs = jobs;
        return eval_by_crowding(pred, gt, OksConfig::defaults(gt.schema.count()), options)
            .to_json()
            .dump();
      },
      py::arg("pred"), py::arg("gt"), py::arg("pred_format") = "native",
      py::arg("gt_format") = "native", py::arg("counting") = "all", py::arg("jobs") = 1);

  m.def(
      "generate_corpus",
      [](std::uint64_t seed, std::size_t scenes, std::size_t bins, double tolerance, unsigned jobs) {
        CorpusConfig cfg;
        cfg.scenes = scenes;
        cfg.bins = bins;
        cfg.tolerance = tolerance;
        cfg.jobs = jobs;
        Corpus c;
        {
          py::gil_scoped_release release;
          c = generate_corpus(seed, cfg);
        }
        return serialize_native(c.dataset);
      },
      py::arg("seed") = 0, py::arg("scenes") = 100, py::arg("bins") = 10,
      py::arg("tolerance") = 0.03, py::arg("jobs") = 1);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = dispatch(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a crowdpose-kit command in-process; returns (code, stdout, stderr).");
}
