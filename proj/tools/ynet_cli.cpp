// Command-line front end: data generation, training, evaluation, inference,
// condition sweeps, merge ablation and component simulation.

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ynet/ynet.hpp"

#ifndef YNET_BUILD_ID
#define YNET_BUILD_ID "unknown"
#endif

namespace fs = std::filesystem;
using namespace ynet;

namespace {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kIo = 3,
  kFormat = 4,
  kRange = 5,
};

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string num(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

fs::path sibling(const fs::path& out, const std::string& suffix) {
  return out.parent_path() / (out.filename().string() + suffix);
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string());
  }
}

Manifest base_manifest(const std::string& command) {
  return {{"command", command}, {"build", YNET_BUILD_ID}};
}

YNet load_model(const fs::path& path) {
  ModelWeights weights = load_weights(path);
  try {
    return YNet(std::move(weights));
  } catch (const std::invalid_argument& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw UsageError(std::string("bad ") + what + " list entry '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(std::string("empty ") + what + " list");
  return out;
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

// Default validation hold-out: one condition in eight, at least one.
std::size_t default_val_conditions(std::size_t conditions) {
  return std::max<std::size_t>(1, conditions / 8);
}

std::pair<std::vector<SamplePair>, std::vector<SamplePair>> train_val_split(
    const std::vector<SamplePair>& pairs, long requested) {
  const std::size_t n = condition_count(pairs);
  if (n < 2) throw UsageError("training data needs at least 2 conditions to hold one out for validation");
  const std::size_t held = requested > 0 ? static_cast<std::size_t>(requested) : default_val_conditions(n);
  if (held >= n) throw UsageError("--val-conditions must be smaller than the number of conditions");
  return split_by_condition(pairs, held);
}

// ------------------------------------------------------------------ gen-data

struct GenDataArgs {
  std::size_t conditions = 100;
  std::size_t tracks = 30;
  std::size_t track_length = 700;
  std::size_t height = 128;
  std::string split = "75:25";
  std::uint64_t seed = 0;
  std::string out;
};

int gen_data(const GenDataArgs& a) {
  const auto start = Clock::now();
  const auto colon = a.split.find(':');
  std::size_t ratio_train = 0, ratio_test = 0;
  auto parse_part = [&](std::string_view s, std::size_t& v) {
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return !s.empty() && ec == std::errc() && ptr == s.data() + s.size();
  };
  if (colon == std::string::npos || !parse_part(std::string_view(a.split).substr(0, colon), ratio_train) ||
      !parse_part(std::string_view(a.split).substr(colon + 1), ratio_test) || ratio_train + ratio_test == 0) {
    throw UsageError("--split must look like TRAIN:TEST with a positive total, got '" + a.split + "'");
  }
  if (a.conditions == 0 || a.tracks == 0) throw UsageError("--conditions and --tracks must be positive");
  const auto n_test = static_cast<std::size_t>(
      std::llround(static_cast<double>(a.conditions) * ratio_test / (ratio_train + ratio_test)));
  const std::size_t n_train = a.conditions - n_test;
  if (ratio_train > 0 && ratio_test > 0 && (n_train == 0 || n_test == 0)) {
    throw UsageError("split " + a.split + " of " + std::to_string(a.conditions) +
                     " conditions leaves one side empty (need N >= 2)");
  }
  const CropPlan plan;
  crop_count(a.track_length, plan);  // rejects short tracks early

  const auto conds = lhs_sample(a.conditions, derive_seed(a.seed, "lhs"));
  const fs::path out(a.out);
  std::size_t index[2] = {0, 0};
  std::uint64_t hashes[2] = {0, 0};
  for (std::size_t i = 0; i < conds.size(); ++i) {
    const bool is_test = i >= n_train;
    std::vector<SamplePair> pairs;
    for (std::size_t j = 0; j < a.tracks; ++j) {
      PowderBedSpec spec;
      spec.track_length_px = a.track_length;
      spec.height_px = a.height;
      spec.seed = derive_seed(a.seed, "bed", i, j);
      const Tensor bed = rain_deposit(spec);
      const Tensor evolved = sinter_oracle(bed, conds[i]);
      auto cropped = crop_track(bed, evolved, conds[i], plan);
      pairs.insert(pairs.end(), std::make_move_iterator(cropped.begin()),
                   std::make_move_iterator(cropped.end()));
    }
    write_dataset(out / (is_test ? "test" : "train"), pairs, index[is_test]);
    index[is_test] += pairs.size();
    hashes[is_test] = hashes[is_test] * 0x100000001b3ull ^ dataset_hash(pairs);
  }
  Manifest m = base_manifest("gen-data");
  m.insert(m.end(), {{"seed", std::to_string(a.seed)},
                     {"conditions", std::to_string(a.conditions)},
                     {"train_conditions", std::to_string(n_train)},
                     {"test_conditions", std::to_string(n_test)},
                     {"tracks", std::to_string(a.tracks)},
                     {"track_length", std::to_string(a.track_length)},
                     {"height", std::to_string(a.height)},
                     {"window", std::to_string(plan.window)},
                     {"stride", std::to_string(plan.stride)},
                     {"train_pairs", std::to_string(index[0])},
                     {"test_pairs", std::to_string(index[1])},
                     {"total_pairs", std::to_string(index[0] + index[1])},
                     {"train_hash", hex64(hashes[0])},
                     {"test_hash", hex64(hashes[1])},
                     {"out", out.string()},
                     {"wall_seconds", num(seconds_since(start))}});
  write_manifest(out / "manifest.txt", m);
  std::cout << "wrote " << index[0] << " train and " << index[1] << " test pairs ("
            << index[0] + index[1] << " total) to " << out.string() << "\n";
  return kOk;
}

// --------------------------------------------------------------------- train

struct TrainArgs {
  std::string data;
  std::string out;
  std::size_t epochs = 20;
  std::size_t batch = 2;
  double lr = 0.001;
  std::uint64_t seed = 0;
  std::string scale = "1";
  std::string merge = "gating";
  long val_conditions = 0;
};

int train_cmd(const TrainArgs& a) {
  const auto start = Clock::now();
  YNetConfig cfg;
  try {
    cfg.scale = ChannelScale::parse(a.scale);
    cfg.merge = parse_merge_strategy(a.merge);
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto pairs = load_dataset(a.data);
  if (pairs.empty()) throw FormatError("no pairs in " + a.data);
  const auto [train_pairs, val_pairs] = train_val_split(pairs, a.val_conditions);

  TrainConfig tc;
  tc.epochs = a.epochs;
  tc.batch_size = a.batch;
  tc.seed = a.seed;
  tc.adam.lr = a.lr;
  try {
    tc.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  YNet model = YNet::build(cfg, derive_seed(a.seed, "init"));
  std::cout << "training " << to_string(cfg.merge) << " model (scale " << cfg.scale.str() << ", "
            << model.parameter_count() << " parameters) on " << train_pairs.size()
            << " pairs, validating on " << val_pairs.size() << "\n";
  const fs::path out(a.out);
  ensure_parent(out);
  std::ofstream history(sibling(out, ".history.csv"));
  if (!history) throw IoError("cannot write " + sibling(out, ".history.csv").string());
  history << "epoch,train_loss,val_loss,val_accuracy,seconds\n";
  const TrainResult result = train(model, train_pairs, val_pairs, tc, [&](std::size_t e, const EpochRecord& r) {
    std::printf("epoch %zu: train_loss %.6f val_loss %.6f val_accuracy %.5f (%.1f s)\n", e + 1,
                r.train_loss, r.val_loss, r.val_accuracy, r.seconds);
    std::fflush(stdout);
    history << e + 1 << ',' << num(r.train_loss) << ',' << num(r.val_loss) << ','
            << num(r.val_accuracy) << ',' << num(r.seconds) << '\n';
  });
  save_weights(result.best, out);

  Manifest m = base_manifest("train");
  const Manifest t = training_manifest(tc, dataset_hash(pairs));
  m.insert(m.end(), t.begin(), t.end());
  m.insert(m.end(), {{"scale", cfg.scale.str()},
                     {"merge", std::string(to_string(cfg.merge))},
                     {"parameters", std::to_string(model.parameter_count())},
                     {"train_pairs", std::to_string(train_pairs.size())},
                     {"val_pairs", std::to_string(val_pairs.size())},
                     {"best_epoch", std::to_string(result.best_epoch + 1)},
                     {"best_val_loss", num(result.history[result.best_epoch].val_loss)},
                     {"final_train_loss", num(result.history.back().train_loss)},
                     {"data", a.data},
                     {"out", out.string()},
                     {"wall_seconds", num(seconds_since(start))}});
  write_manifest(sibling(out, ".manifest.txt"), m);
  std::cout << "saved best checkpoint (epoch " << result.best_epoch + 1 << ") to " << out.string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------- eval

int eval_cmd(const std::string& model_path, const std::string& data, const std::string& report) {
  const auto start = Clock::now();
  const YNet model = load_model(model_path);
  const auto pairs = load_dataset(data);
  if (pairs.empty()) throw FormatError("no pairs in " + data);
  const Evaluation ev = evaluate(model, pairs);
  std::printf("pairs %zu\nmean_global_accuracy %.6f\nmean_loss %.6f\n", pairs.size(), ev.accuracy, ev.loss);
  if (!report.empty()) {
    Manifest m = base_manifest("eval");
    m.insert(m.end(), {{"model", model_path},
                       {"data", data},
                       {"pairs", std::to_string(pairs.size())},
                       {"mean_global_accuracy", num(ev.accuracy)},
                       {"mean_loss", num(ev.loss)},
                       {"wall_seconds", num(seconds_since(start))}});
    ensure_parent(report);
    write_manifest(report, m);
  }
  return kOk;
}

// ------------------------------------------------------------------ simulate

int simulate_cmd(const std::string& model_path, const std::string& input, double power, double speed,
                 const std::string& out_path) {
  const auto start = Clock::now();
  const Condition cond(power, speed);  // range check before anything is loaded
  const YNet model = load_model(model_path);
  const Tensor track = read_pgm(input);
  InferenceStats stats;
  const Tensor out = binarize(infer_track(model, track, cond, &stats));
  ensure_parent(out_path);
  write_pgm(out_path, out);
  Manifest m = base_manifest("simulate");
  m.insert(m.end(), {{"model", model_path},
                     {"input", input},
                     {"power", num(power)},
                     {"speed", num(speed)},
                     {"out", out_path},
                     {"frames", std::to_string(stats.frames)},
                     {"inference_seconds", num(stats.seconds)},
                     {"frames_per_second", num(stats.frames_per_second())},
                     {"wall_seconds", num(seconds_since(start))}});
  write_manifest(sibling(out_path, ".manifest.txt"), m);
  std::printf("frames %zu, %.1f frames/s\n", stats.frames, stats.frames_per_second());
  return kOk;
}

// ----------------------------------------------------------------- component

struct ComponentArgs {
  std::string model;
  std::string mask;
  double power = 0.0;
  double speed = 0.0;
  std::string out;
  std::size_t layer_height = 70;
  std::size_t segment_length = 700;
  std::uint64_t seed = 0;
};

int component_cmd(const ComponentArgs& a) {
  const auto start = Clock::now();
  const Condition cond(a.power, a.speed);
  const YNet model = load_model(a.model);
  ComponentSpec spec;
  spec.mask = read_pgm(a.mask);
  for (float& v : spec.mask.values()) v = v > 0.0f ? 1.0f : 0.0f;
  spec.layer_height_px = a.layer_height;
  spec.segment_length_px = a.segment_length;
  if (a.layer_height == 0 || a.segment_length == 0) throw UsageError("layer height and segment length must be positive");
  const ComponentResult r = simulate_component(model, spec, cond, derive_seed(a.seed, "component"));
  ensure_parent(a.out);
  write_pgm(a.out, r.raster);
  Manifest m = base_manifest("component");
  m.insert(m.end(), {{"model", a.model},
                     {"mask", a.mask},
                     {"power", num(a.power)},
                     {"speed", num(a.speed)},
                     {"seed", std::to_string(a.seed)},
                     {"layer_height", std::to_string(a.layer_height)},
                     {"segment_length", std::to_string(a.segment_length)},
                     {"layers", std::to_string(r.layers)},
                     {"frames", std::to_string(r.stats.frames)},
                     {"inference_seconds", num(r.stats.seconds)},
                     {"frames_per_second", num(r.stats.frames_per_second())},
                     {"out", a.out},
                     {"wall_seconds", num(seconds_since(start))}});
  write_manifest(sibling(a.out, ".summary.txt"), m);
  std::printf("layers %zu, frames %zu, %.1f frames/s\n", r.layers, r.stats.frames, r.stats.frames_per_second());
  return kOk;
}

// --------------------------------------------------------------------- sweep

/// Mean over columns of the deepest changed row, counted in pixels below the
/// surface row (0 for untouched columns).
double sintered_depth(const Tensor& before, const Tensor& after) {
  const std::size_t rows = before.dim(0);
  const std::size_t cols = before.dim(1);
  const std::size_t top = bed_surface_row(before).value_or(0);
  double total = 0.0;
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = rows; r-- > top;) {
      const std::size_t i = r * cols + c;
      if ((before[i] >= 0.5f) != (after[i] >= 0.5f)) {
        total += static_cast<double>(r - top + 1);
        break;
      }
    }
  }
  return total / static_cast<double>(cols);
}

int sweep_cmd(const std::string& model_path, const std::string& powers_text, const std::string& speeds_text,
              std::size_t track_length, std::uint64_t seed, const std::string& out_path) {
  const auto start = Clock::now();
  const auto powers = parse_list(powers_text, "power");
  const auto speeds = parse_list(speeds_text, "speed");
  std::vector<Condition> conds;
  for (double p : powers) {
    for (double s : speeds) conds.emplace_back(p, s);
  }
  const YNet model = load_model(model_path);
  PowderBedSpec spec;
  spec.track_length_px = track_length;
  spec.seed = derive_seed(seed, "sweep");
  const Tensor bed = rain_deposit(spec);
  ensure_parent(out_path);
  std::ofstream csv(out_path);
  if (!csv) throw IoError("cannot write " + out_path);
  csv << "power,speed,depth\n";
  InferenceStats stats;
  for (const Condition& c : conds) {
    const Tensor out = binarize(infer_track(model, bed, c, &stats));
    csv << num(c.power()) << ',' << num(c.speed()) << ',' << num(sintered_depth(bed, out)) << '\n';
  }
  if (!csv) throw IoError("write failed: " + out_path);
  Manifest m = base_manifest("sweep");
  m.insert(m.end(), {{"model", model_path},
                     {"powers", powers_text},
                     {"speeds", speeds_text},
                     {"track_length", std::to_string(track_length)},
                     {"seed", std::to_string(seed)},
                     {"rows", std::to_string(conds.size())},
                     {"frames", std::to_string(stats.frames)},
                     {"frames_per_second", num(stats.frames_per_second())},
                     {"out", out_path},
                     {"wall_seconds", num(seconds_since(start))}});
  write_manifest(sibling(out_path, ".manifest.txt"), m);
  std::printf("wrote %zu rows to %s\n", conds.size(), out_path.c_str());
  return kOk;
}

// -------------------------------------------------------------- ablate-merge

struct AblateArgs {
  std::string data;
  std::string strategies = "gating,flatten_concat,flatten_add";
  std::size_t epochs = 2;
  std::size_t batch = 2;
  double lr = 0.001;
  std::string scale = "1/8";
  std::uint64_t seed = 0;
  long val_conditions = 0;
  std::string out;
};

int ablate_cmd(const AblateArgs& a) {
  const auto start = Clock::now();
  std::vector<MergeStrategy> strategies;
  ChannelScale scale;
  try {
    for (const auto& name : split_names(a.strategies)) strategies.push_back(parse_merge_strategy(name));
    scale = ChannelScale::parse(a.scale);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (strategies.empty()) throw UsageError("no strategies given");
  const auto pairs = load_dataset(a.data);
  if (pairs.empty()) throw FormatError("no pairs in " + a.data);
  const auto [train_pairs, val_pairs] = train_val_split(pairs, a.val_conditions);
  TrainConfig tc;
  tc.epochs = a.epochs;
  tc.batch_size = a.batch;
  tc.seed = a.seed;
  tc.adam.lr = a.lr;
  try {
    tc.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  ensure_parent(a.out);
  std::ofstream csv(a.out);
  if (!csv) throw IoError("cannot write " + a.out);
  csv << "strategy,parameters,final_train_loss,val_accuracy,wall_seconds\n";
  bool all_finite = true;
  for (MergeStrategy s : strategies) {
    const auto t0 = Clock::now();
    YNetConfig cfg;
    cfg.scale = scale;
    cfg.merge = s;
    YNet model = YNet::build(cfg, derive_seed(a.seed, "init"));
    const TrainResult r = train(model, train_pairs, val_pairs, tc);
    const double final_loss = r.history.back().train_loss;
    const double val_acc = r.history.back().val_accuracy;
    all_finite = all_finite && std::isfinite(final_loss);
    csv << to_string(s) << ',' << model.parameter_count() << ',' << num(final_loss) << ',' << num(val_acc)
        << ',' << num(seconds_since(t0)) << '\n';
    csv.flush();
    std::printf("%s: %zu parameters, final train loss %.6f, val accuracy %.5f\n",
                std::string(to_string(s)).c_str(), model.parameter_count(), final_loss, val_acc);
    std::fflush(stdout);
  }
  Manifest m = base_manifest("ablate-merge");
  m.insert(m.end(), {{"data", a.data},
                     {"strategies", a.strategies},
                     {"scale", scale.str()},
                     {"epochs", std::to_string(a.epochs)},
                     {"batch_size", std::to_string(a.batch)},
                     {"lr", num(a.lr)},
                     {"seed", std::to_string(a.seed)},
                     {"data_hash", hex64(dataset_hash(pairs))},
                     {"out", a.out},
                     {"wall_seconds", num(seconds_since(start))}});
  write_manifest(sibling(a.out, ".manifest.txt"), m);
  if (!all_finite) {
    std::cerr << "error: a strategy ended with a non-finite loss\n";
    return kFailure;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"yNet: condition-aware field evolution surrogate"};
  app.require_subcommand(1);
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  GenDataArgs gd;
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset split by condition");
  gen->add_option("--conditions", gd.conditions, "Number of LHS conditions")->capture_default_str();
  gen->add_option("--tracks", gd.tracks, "Beds per condition")->capture_default_str();
  gen->add_option("--track-length", gd.track_length, "Track length (px)")->capture_default_str();
  gen->add_option("--height", gd.height, "Track height (px)")->capture_default_str();
  gen->add_option("--split", gd.split, "train:test condition ratio")->capture_default_str();
  gen->add_option("--seed", gd.seed, "Run seed")->capture_default_str();
  gen->add_option("--out", gd.out, "Output directory")->required();

  TrainArgs ta;
  auto* tr = app.add_subcommand("train", "Train a model on a dataset directory");
  tr->add_option("--data", ta.data, "Training dataset directory")->required();
  tr->add_option("--out", ta.out, "Output weights file")->required();
  tr->add_option("--epochs", ta.epochs)->capture_default_str();
  tr->add_option("--batch", ta.batch)->capture_default_str();
  tr->add_option("--lr", ta.lr)->capture_default_str();
  tr->add_option("--seed", ta.seed)->capture_default_str();
  tr->add_option("--scale", ta.scale, "Channel scale, e.g. 1/4")->capture_default_str();
  tr->add_option("--merge", ta.merge, "gating, flatten_concat or flatten_add")->capture_default_str();
  tr->add_option("--val-conditions", ta.val_conditions, "Conditions held out for validation (default 1 in 8)");

  std::string ev_model, ev_data, ev_report;
  auto* ev = app.add_subcommand("eval", "Mean global accuracy of a model on a dataset");
  ev->add_option("--model", ev_model)->required();
  ev->add_option("--data", ev_data)->required();
  ev->add_option("--report", ev_report, "Write results as key=value lines");

  std::string sm_model, sm_input, sm_out;
  double sm_power = 0.0, sm_speed = 0.0;
  auto* sm = app.add_subcommand("simulate", "Tiled inference over one track");
  sm->add_option("--model", sm_model)->required();
  sm->add_option("--input", sm_input, "Input track (PGM)")->required();
  sm->add_option("--power", sm_power, "Laser power (W)")->required();
  sm->add_option("--speed", sm_speed, "Scan speed (m/s)")->required();
  sm->add_option("--out", sm_out, "Output track (PGM)")->required();

  ComponentArgs ca;
  auto* co = app.add_subcommand("component", "Layer-by-layer simulation of a masked component");
  co->add_option("--model", ca.model)->required();
  co->add_option("--mask", ca.mask, "Component mask (PGM, nonzero = inside)")->required();
  co->add_option("--power", ca.power)->required();
  co->add_option("--speed", ca.speed)->required();
  co->add_option("--out", ca.out, "Output raster (PGM)")->required();
  co->add_option("--layer-height", ca.layer_height)->capture_default_str();
  co->add_option("--segment-length", ca.segment_length)->capture_default_str();
  co->add_option("--seed", ca.seed)->capture_default_str();

  std::string sw_model, sw_powers = "25,30,35,40", sw_speeds = "0.5,1.1667,1.8333,2.5", sw_out;
  std::size_t sw_length = 700;
  std::uint64_t sw_seed = 0;
  auto* sw = app.add_subcommand("sweep", "Sintered depth over a power x speed grid");
  sw->add_option("--model", sw_model)->required();
  sw->add_option("--powers", sw_powers)->capture_default_str();
  sw->add_option("--speeds", sw_speeds)->capture_default_str();
  sw->add_option("--track-length", sw_length)->capture_default_str();
  sw->add_option("--seed", sw_seed)->capture_default_str();
  sw->add_option("--out", sw_out, "Output CSV")->required();

  AblateArgs aa;
  auto* ab = app.add_subcommand("ablate-merge", "Train each merge strategy on the same data and budget");
  ab->add_option("--data", aa.data)->required();
  ab->add_option("--strategies", aa.strategies)->capture_default_str();
  ab->add_option("--epochs", aa.epochs)->capture_default_str();
  ab->add_option("--batch", aa.batch)->capture_default_str();
  ab->add_option("--lr", aa.lr)->capture_default_str();
  ab->add_option("--scale", aa.scale)->capture_default_str();
  ab->add_option("--seed", aa.seed)->capture_default_str();
  ab->add_option("--val-conditions", aa.val_conditions);
  ab->add_option("--out", aa.out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  set_num_threads(threads);
  omp_set_num_threads(threads);
  try {
    if (*gen) return gen_data(gd);
    if (*tr) return train_cmd(ta);
    if (*ev) return eval_cmd(ev_model, ev_data, ev_report);
    if (*sm) return simulate_cmd(sm_model, sm_input, sm_power, sm_speed, sm_out);
    if (*co) return component_cmd(ca);
    if (*sw) return sweep_cmd(sw_model, sw_powers, sw_speeds, sw_length, sw_seed, sw_out);
    if (*ab) return ablate_cmd(aa);
  } catch (const RangeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRange;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const WeightsFormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == WeightsFormatError::Kind::io ? kIo : kFormat;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFormat;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
