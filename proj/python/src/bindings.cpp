#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ynet/ynet.hpp"

namespace py = pybind11;
using namespace ynet;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const FloatArray& a) {
  Shape shape(a.shape(), a.shape() + a.ndim());
  return Tensor(std::move(shape), std::vector<float>(a.data(), a.data() + a.size()));
}

py::array_t<float> to_array(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  py::array_t<float> out(shape);
  std::copy_n(t.data(), t.size(), out.mutable_data());
  return out;
}

YNetConfig make_config(const std::string& scale, const std::string& merge, std::size_t input_size) {
  YNetConfig cfg;
  cfg.scale = ChannelScale::parse(scale);
  cfg.merge = parse_merge_strategy(merge);
  cfg.input_size = input_size;
  cfg.validate();
  return cfg;
}

py::dict config_dict(const YNetConfig& c) {
  py::dict d;
  d["scale"] = c.scale.str();
  d["merge"] = std::string(to_string(c.merge));
  d["input_size"] = c.input_size;
  d["base_channels"] = c.base_channels;
  d["width"] = c.width();
  d["stages"] = c.stages;
  d["mlp_hidden"] = c.mlp_hidden;
  d["bottleneck"] = py::make_tuple(c.gate_size(), c.bottleneck_size(), c.bottleneck_size());
  return d;
}

py::list pairs_to_list(const std::vector<SamplePair>& pairs) {
  py::list out;
  for (const auto& p : pairs)
    out.append(py::make_tuple(to_array(p.input), to_array(p.target), p.cond.power(), p.cond.speed()));
  return out;
}

}  // namespace

PYBIND11_MODULE(_ynet, m) {
  m.doc() = "Conditional encoder-decoder for sintering fields: core bindings";

  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<RangeError>(m, "RangeError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<WeightsFormatError>(m, "WeightsFormatError", PyExc_ValueError);

  m.def("derive_seed", &derive_seed, py::arg("seed"), py::arg("stream"), py::arg("a") = 0, py::arg("b") = 0);

  py::class_<Condition>(m, "Condition")
      .def(py::init<double, double>(), py::arg("power"), py::arg("speed"))
      .def_property_readonly("power", &Condition::power)
      .def_property_readonly("speed", &Condition::speed)
      .def("normalized", &Condition::normalized)
      .def("__eq__", [](const Condition& a, const Condition& b) { return a == b; })
      .def("__repr__", [](const Condition& c) {
        return "Condition(power=" + std::to_string(c.power()) + ", speed=" + std::to_string(c.speed()) + ")";
      });

  m.def("lhs_sample", py::overload_cast<std::size_t, std::uint64_t>(&lhs_sample), py::arg("n"),
        py::arg("seed"), "Latin hypercube conditions over the default power and speed ranges.");

  m.def(
      "rain_deposit",
      [](std::size_t track_length, std::size_t height, std::uint64_t seed, double fill_height,
         double mean_diameter, double std_diameter) {
        PowderBedSpec spec;
        spec.track_length_px = track_length;
        spec.height_px = height;
        spec.seed = seed;
        spec.target_fill_height_px = fill_height;
        spec.mean_diameter_px = mean_diameter;
        spec.std_diameter_px = std_diameter;
        return to_array(rain_deposit(spec));
      },
      py::arg("track_length") = 700, py::arg("height") = 128, py::arg("seed") = 0,
      py::arg("fill_height") = 100.0, py::arg("mean_diameter") = 12.5, py::arg("std_diameter") = 0.25);

  m.def(
      "oracle_schedule",
      [](double power, double speed) {
        const auto s = oracle_schedule(Condition(power, speed));
        return py::make_tuple(s.intensity, s.depth, s.iterations);
      },
      py::arg("power"), py::arg("speed"), "(intensity, depth, iterations) of the synthetic sintering transform.");
  m.def(
      "sinter_oracle",
      [](const FloatArray& field, double power, double speed) {
        return to_array(sinter_oracle(to_tensor(field), Condition(power, speed)));
      },
      py::arg("field"), py::arg("power"), py::arg("speed"));
  m.def(
      "bed_surface_row", [](const FloatArray& field) { return bed_surface_row(to_tensor(field)); },
      py::arg("field"));

  m.def(
      "crop_count",
      [](std::size_t length, std::size_t window, std::size_t stride) {
        return crop_count(length, CropPlan{window, stride});
      },
      py::arg("length"), py::arg("window") = 128, py::arg("stride") = 10);
  m.def(
      "dataset_pair_count",
      [](std::size_t conditions, std::size_t tracks, std::size_t length) {
        return dataset_pair_count(conditions, tracks, length);
      },
      py::arg("conditions"), py::arg("tracks"), py::arg("length"));
  m.def("tile_offsets", &tile_offsets, py::arg("length"), py::arg("window") = 128);

  m.def(
      "global_accuracy",
      [](const FloatArray& pred, const FloatArray& truth) {
        return global_accuracy(to_tensor(pred), to_tensor(truth));
      },
      py::arg("pred"), py::arg("truth"));

  m.def(
      "read_pgm", [](const std::filesystem::path& p) { return to_array(read_pgm(p)); }, py::arg("path"));
  m.def(
      "write_pgm", [](const std::filesystem::path& p, const FloatArray& f) { write_pgm(p, to_tensor(f)); },
      py::arg("path"), py::arg("field"));
  m.def(
      "load_dataset", [](const std::filesystem::path& dir) { return pairs_to_list(load_dataset(dir)); },
      py::arg("directory"), "List of (input, target, power, speed) tuples in index order.");

  py::class_<YNet>(m, "Model")
      .def_static(
          "build",
          [](const std::string& scale, const std::string& merge, std::uint64_t seed, std::size_t input_size) {
            return YNet::build(make_config(scale, merge, input_size), seed);
          },
          py::arg("scale") = "1", py::arg("merge") = "gating", py::arg("seed") = 0, py::arg("input_size") = 128)
      .def_static(
          "load", [](const std::filesystem::path& p) { return YNet(load_weights(p)); }, py::arg("path"))
      .def(
          "save", [](const YNet& m, const std::filesystem::path& p) { save_weights(m.weights(), p); },
          py::arg("path"))
      .def_property_readonly("config", [](const YNet& m) { return config_dict(m.config()); })
      .def_property_readonly("parameter_count", &YNet::parameter_count)
      .def_property_readonly("weight_names",
                             [](const YNet& m) {
                               std::vector<std::string> names;
                               for (const auto& e : m.weights().entries()) names.push_back(e.name);
                               return names;
                             })
      .def(
          "weight",
          [](const YNet& m, const std::string& name) { return to_array(m.weights().at(name)); },
          py::arg("name"))
      .def(
          "predict",
          [](const YNet& m, const FloatArray& fields, const FloatArray& conds) {
            const Tensor f = to_tensor(fields), c = to_tensor(conds);
            Tensor out;
            {
              py::gil_scoped_release release;
              out = m.predict(f, c);
            }
            return to_array(out);
          },
          py::arg("fields"), py::arg("conds"), "fields [N,1,S,S] and normalized conds [N,2] -> [N,1,S,S]")
      .def(
          "infer_track",
          [](const YNet& m, const FloatArray& track, double power, double speed) {
            const Tensor t = to_tensor(track);
            const Condition cond(power, speed);
            Tensor out;
            {
              py::gil_scoped_release release;
              out = infer_track(m, t, cond);
            }
            return to_array(out);
          },
          py::arg("track"), py::arg("power"), py::arg("speed"))
      .def(
          "evaluate",
          [](const YNet& m, const std::filesystem::path& dir) {
            const auto pairs = load_dataset(dir);
            py::gil_scoped_release release;
            const Evaluation e = evaluate(m, pairs);
            return std::make_pair(e.loss, e.accuracy);
          },
          py::arg("directory"), "(mean loss, mean global accuracy) over a dataset directory.")
      .def(
          "train",
          [](YNet& m, const std::filesystem::path& train_dir, const std::filesystem::path& val_dir,
             std::size_t epochs, std::size_t batch_size, double lr, std::uint64_t seed) {
            const auto tr = load_dataset(train_dir);
            const auto va = load_dataset(val_dir);
            TrainConfig cfg;
            cfg.epochs = epochs;
            cfg.batch_size = batch_size;
            cfg.adam.lr = lr;
            cfg.seed = seed;
            TrainResult res;
            {
              py::gil_scoped_release release;
              res = train(m, tr, va, cfg);
            }
            m.weights() = res.best;
            py::list history;
            for (const auto& r : res.history) {
              py::dict d;
              d["train_loss"] = r.train_loss;
              d["val_loss"] = r.val_loss;
              d["val_accuracy"] = r.val_accuracy;
              d["seconds"] = r.seconds;
              history.append(d);
            }
            return history;
          },
          py::arg("train_dir"), py::arg("val_dir"), py::arg("epochs") = 20, py::arg("batch_size") = 2,
          py::arg("lr") = 0.001, py::arg("seed") = 0,
          "Trains in place, keeps the best-validation checkpoint, returns per-epoch history.");

  m.def(
      "simulate_component",
      [](const YNet& model, const FloatArray& mask, double power, double speed, std::uint64_t seed,
         std::size_t layer_height, std::size_t segment_length) {
        ComponentSpec spec;
        spec.mask = to_tensor(mask);
        spec.layer_height_px = layer_height;
        spec.segment_length_px = segment_length;
        const Condition cond(power, speed);
        ComponentResult r;
        {
          py::gil_scoped_release release;
          r = simulate_component(model, spec, cond, seed);
        }
        py::dict stats;
        stats["layers"] = r.layers;
        stats["frames"] = r.stats.frames;
        stats["frames_per_second"] = r.stats.frames_per_second();
        return py::make_tuple(to_array(r.raster), stats);
      },
      py::arg("model"), py::arg("mask"), py::arg("power"), py::arg("speed"), py::arg("seed") = 0,
      py::arg("layer_height") = 70, py::arg("segment_length") = 700);
}
