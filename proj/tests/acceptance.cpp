// End-to-end acceptance run: one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cli_support.hpp"
#include "ynet/ynet.hpp"

using namespace ynet;
namespace fs = std::filesystem;
using test::run_cli;
using test::slurp;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::map<std::string, std::string> read_keyvalues(const fs::path& path) {
  std::map<std::string, std::string> kv;
  std::istringstream in(slurp(path));
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(path));
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

// Runs a test binary and reports whether every test passed.
bool run_binary(const std::string& exe, const std::string& args, std::string& tail) {
  const std::string cmd = "\"" + exe + "\" " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return false;
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  const int status = pclose(pipe);
  const auto pos = out.rfind("[==========]");
  tail = pos == std::string::npos ? out.substr(out.size() > 400 ? out.size() - 400 : 0) : out.substr(pos);
  while (!tail.empty() && std::isspace(static_cast<unsigned char>(tail.back()))) tail.pop_back();
  for (auto& c : tail)
    if (c == '\n') c = ' ';
  return WIFEXITED(status) && WEXITSTATUS(status) == 0;
}

// ----------------------------------------------------------------- criteria

Outcome gradients() {
  const auto t0 = Clock::now();
  std::string layers_tail, model_tail;
  const bool layers = run_binary(YNET_TEST_LAYERS, "--gtest_brief=1", layers_tail);
  const bool model = run_binary(YNET_TEST_MODEL, "--gtest_brief=1 --gtest_filter=Backward.*", model_tail);
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << "layers[" << layers_tail << "] model[" << model_tail << "] " << secs << " s (limit 120 s)";
  return {layers && model && secs <= 120.0, d.str()};
}

Outcome tiling() {
  const std::size_t crops = crop_count(700);
  const std::size_t per_condition = dataset_pair_count(1, 30, 700);
  const std::size_t frames = tile_offsets(700).size();
  const std::size_t total = dataset_pair_count(100, 30, 700);
  std::ostringstream d;
  d << "crops " << crops << ", pairs/condition " << per_condition << ", frames " << frames << ", total "
    << total;
  return {crops == 58 && per_condition == 1740 && frames == 6 && total == 174000, d.str()};
}

Outcome shapes() {
  YNetConfig cfg;
  YNet model = YNet::build(cfg, 1);
  const Tensor fields({1, 1, 128, 128});
  const Tensor conds({1, 2}, std::vector<float>{0.5f, 0.5f});
  const auto pass = model.forward(fields, conds, Mode::infer);
  const Shape bottleneck = pass.dropped.shape();
  const Shape w0 = model.weights().at("mlp.fc0.weight").shape();
  const Shape w1 = model.weights().at("mlp.fc1.weight").shape();
  const Shape out = pass.prediction.shape();
  std::ostringstream d;
  d << "bottleneck " << shape_string(bottleneck) << ", mlp " << w0[1] << "->" << w0[0] << "->" << w1[0]
    << ", output " << shape_string(out);
  const bool ok = bottleneck == Shape{1, 256, 8, 8} && w0 == Shape{128, 2} && w1 == Shape{256, 128} &&
                  out == Shape{1, 1, 128, 128};
  return {ok, d.str()};
}

Outcome serialization(const fs::path& work) {
  YNetConfig cfg;
  cfg.scale = ChannelScale::parse("1/8");
  const YNet model = YNet::build(cfg, 3);
  const fs::path path = work / "roundtrip.ynw";
  save_weights(model.weights(), path);
  const ModelWeights back = load_weights(path);
  const bool round_trip = back == model.weights() && serialize_weights(back) == slurp(path);

  const std::string good = slurp(path);
  auto kind_of = [](const std::string& bytes) -> std::string {
    try {
      deserialize_weights(bytes);
      return "accepted";
    } catch (const WeightsFormatError& e) {
      switch (e.kind()) {
        case WeightsFormatError::Kind::bad_magic: return "bad_magic";
        case WeightsFormatError::Kind::truncated_payload: return "truncated_payload";
        case WeightsFormatError::Kind::duplicate_name: return "duplicate_name";
        case WeightsFormatError::Kind::invalid_rank: return "invalid_rank";
        case WeightsFormatError::Kind::trailing_bytes: return "trailing_bytes";
        case WeightsFormatError::Kind::io: return "io";
      }
    }
    return "?";
  };
  auto u32 = [](std::uint32_t v) {
    std::string s(4, '\0');
    for (int i = 0; i < 4; ++i) s[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    return s;
  };
  const std::string entry = u32(1) + "a" + u32(1) + u32(1) + std::string(4, '\0');
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"X" + good.substr(1), "bad_magic"},
      {good.substr(0, good.size() - 3), "truncated_payload"},
      {good + "zz", "trailing_bytes"},
      {"YNW1" + u32(2) + entry + entry, "duplicate_name"},
      {"YNW1" + u32(1) + u32(1) + "a" + u32(9), "invalid_rank"},
  };
  bool kinds = true;
  std::ostringstream d;
  d << "round trip " << (round_trip ? "bit-identical" : "MISMATCH");
  for (const auto& [bytes, want] : cases) {
    const std::string got = kind_of(bytes);
    if (got != want) {
      kinds = false;
      d << "; expected " << want << " got " << got;
    }
  }
  try {
    load_weights(work / "does_not_exist.ynw");
    kinds = false;
  } catch (const WeightsFormatError& e) {
    kinds = kinds && e.kind() == WeightsFormatError::Kind::io;
  }
  if (kinds) d << "; all 6 corruption kinds rejected as specified";
  return {round_trip && kinds, d.str()};
}

struct EndToEnd {
  bool ok = false;
  std::string failure;
  double accuracy = 0.0;
  std::string accuracy_text;
  double seconds = 0.0;
  fs::path model;
  std::string data_hashes;
};

EndToEnd run_end_to_end(const fs::path& dir) {
  EndToEnd r;
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto t0 = Clock::now();
  const auto gen = run_cli("gen-data --conditions 10 --tracks 2 --track-length 700 --split 8:2 --seed 42 --out " +
                           (dir / "data").string());
  if (gen.code != 0) {
    r.failure = "gen-data exit " + std::to_string(gen.code);
    return r;
  }
  r.model = dir / "model.ynw";
  const auto tr = run_cli("train --data " + (dir / "data" / "train").string() + " --out " + r.model.string() +
                          " --scale 1/4 --epochs 10 --batch 2 --lr 0.001 --seed 42");
  if (tr.code != 0) {
    r.failure = "train exit " + std::to_string(tr.code) + ": " + tr.output;
    return r;
  }
  const fs::path report = dir / "eval.txt";
  const auto ev = run_cli("eval --model " + r.model.string() + " --data " + (dir / "data" / "test").string() +
                          " --report " + report.string());
  if (ev.code != 0) {
    r.failure = "eval exit " + std::to_string(ev.code);
    return r;
  }
  r.seconds = seconds_since(t0);
  const auto kv = read_keyvalues(report);
  r.accuracy_text = kv.count("mean_global_accuracy") ? kv.at("mean_global_accuracy") : "";
  r.accuracy = r.accuracy_text.empty() ? 0.0 : std::stod(r.accuracy_text);
  const auto manifest = read_keyvalues(dir / "data" / "manifest.txt");
  r.data_hashes = manifest.count("train_hash") ? manifest.at("train_hash") + "/" + manifest.at("test_hash") : "";
  r.ok = true;
  return r;
}

Outcome desk_scale(const EndToEnd& run) {
  if (!run.ok) return {false, run.failure};
  std::ostringstream d;
  d << "mean global accuracy " << run.accuracy << " (>= 0.97), wall " << run.seconds << " s (limit 1800 s)";
  return {run.accuracy >= 0.97 && run.seconds <= 1800.0, d.str()};
}

// At most one adjacent inversion, of at most 2 px, per row or column.
bool monotone(const std::vector<double>& v, bool increasing, std::string& note) {
  int inversions = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double step = increasing ? v[i] - v[i - 1] : v[i - 1] - v[i];
    if (step < 0.0) {
      ++inversions;
      if (-step > 2.0) {
        note = "inversion of " + std::to_string(-step) + " px";
        return false;
      }
    }
  }
  if (inversions > 1) note = std::to_string(inversions) + " inversions";
  return inversions <= 1;
}

Outcome sweep(const EndToEnd& run, const fs::path& dir) {
  if (!run.ok) return {false, "no model from criterion 4"};
  const fs::path csv = dir / "sweep.csv";
  const auto r = run_cli("sweep --model " + run.model.string() +
                         " --powers 25,30,35,40 --speeds 0.5,1.1667,1.8333,2.5 --seed 42 --out " + csv.string());
  if (r.code != 0) return {false, "sweep exit " + std::to_string(r.code)};
  const auto rows = read_csv(csv);
  std::map<std::pair<double, double>, double> depth;
  std::vector<double> powers, speeds;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double p = std::stod(rows[i][0]), s = std::stod(rows[i][1]);
    depth[{p, s}] = std::stod(rows[i][2]);
    if (std::find(powers.begin(), powers.end(), p) == powers.end()) powers.push_back(p);
    if (std::find(speeds.begin(), speeds.end(), s) == speeds.end()) speeds.push_back(s);
  }
  if (powers.size() != 4 || speeds.size() != 4) return {false, "expected a 4x4 grid"};
  bool ok = true;
  std::ostringstream d;
  for (double s : speeds) {
    std::vector<double> col;
    for (double p : powers) col.push_back(depth[{p, s}]);
    std::string note;
    if (!monotone(col, true, note)) {
      ok = false;
      d << "power series at speed " << s << ": " << note << "; ";
    }
  }
  for (double p : powers) {
    std::vector<double> row;
    for (double s : speeds) row.push_back(depth[{p, s}]);
    std::string note;
    if (!monotone(row, false, note)) {
      ok = false;
      d << "speed series at power " << p << ": " << note << "; ";
    }
  }
  d.precision(3);
  d << "depth px: P25/v0.5 " << depth[{25, 0.5}] << ", P40/v0.5 " << depth[{40, 0.5}] << ", P25/v2.5 "
    << depth[{25, 2.5}] << ", P40/v2.5 " << depth[{40, 2.5}];
  return {ok, d.str()};
}

Outcome ablation(const fs::path& dir) {
  fs::remove_all(dir);
  const auto t0 = Clock::now();
  // 12 conditions x 10 single-crop tracks; the 10 training conditions give 100 pairs.
  const auto gen = run_cli("gen-data --conditions 12 --tracks 10 --track-length 128 --split 10:2 --seed 7 --out " +
                           (dir / "data").string());
  if (gen.code != 0) return {false, "gen-data exit " + std::to_string(gen.code)};
  const std::size_t pairs = load_dataset(dir / "data" / "train").size();
  const fs::path csv = dir / "ablation.csv";
  const auto r = run_cli("ablate-merge --data " + (dir / "data" / "train").string() +
                         " --strategies gating,flatten_concat,flatten_add --seed 7 --out " + csv.string());
  const double secs = seconds_since(t0);
  if (r.code != 0) return {false, "ablate-merge exit " + std::to_string(r.code)};
  const auto rows = read_csv(csv);
  std::map<std::string, std::pair<double, double>> by_name;  // parameters, loss
  bool finite = true;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double params = std::stod(rows[i][1]);
    const double loss = std::stod(rows[i][2]);
    const double acc = std::stod(rows[i][3]);
    by_name[rows[i][0]] = {params, loss};
    finite = finite && std::isfinite(loss) && std::isfinite(acc);
  }
  const bool all = by_name.size() == 3 && rows.size() == 4;
  const bool fewer = all && by_name["gating"].first < by_name["flatten_concat"].first;
  std::ostringstream d;
  d << pairs << " pairs; params gating " << by_name["gating"].first << " < flatten_concat "
    << by_name["flatten_concat"].first << "; final losses " << by_name["gating"].second << " / "
    << by_name["flatten_concat"].second << " / " << by_name["flatten_add"].second << "; " << secs
    << " s (limit 600 s)";
  return {pairs == 100 && all && fewer && finite && secs <= 600.0, d.str()};
}

Outcome determinism(const EndToEnd& a, const EndToEnd& b) {
  if (!a.ok || !b.ok) return {false, "a run failed: " + a.failure + b.failure};
  const bool data = a.data_hashes == b.data_hashes && !a.data_hashes.empty();
  const bool weights = slurp(a.model) == slurp(b.model);
  const bool accuracy = a.accuracy_text == b.accuracy_text;
  std::ostringstream d;
  d << "data hashes " << (data ? "equal" : "DIFFER") << ", weights " << (weights ? "bit-identical" : "DIFFER")
    << ", accuracy " << a.accuracy_text << " vs " << b.accuracy_text;
  return {data && weights && accuracy, d.str()};
}

Outcome component(const EndToEnd& run) {
  const auto t0 = Clock::now();
  YNet model = run.ok ? YNet(load_weights(run.model)) : [] {
    YNetConfig cfg;
    cfg.scale = ChannelScale::parse("1/4");
    return YNet::build(cfg, 42);
  }();
  // 700 px wide rectangle inside a wider canvas, three 70 px layers tall.
  ComponentSpec spec;
  spec.mask = Tensor({210, 760});
  for (std::size_t r = 0; r < 210; ++r)
    for (std::size_t c = 30; c < 730; ++c) spec.mask.at(r, c) = 1.0f;
  const ComponentResult res = simulate_component(model, spec, Condition(32.5, 1.5), 42);
  const double secs = seconds_since(t0);
  std::size_t outside = 0, inside_solid = 0;
  for (std::size_t i = 0; i < spec.mask.size(); ++i) {
    if (spec.mask[i] == 0.0f && res.raster[i] != 0.0f) ++outside;
    if (spec.mask[i] != 0.0f && res.raster[i] != 0.0f) ++inside_solid;
  }
  std::ostringstream d;
  d << res.layers << " layers, " << res.stats.frames << " frames at " << res.stats.frames_per_second()
    << " frames/s, " << outside << " pixels written outside the mask, " << inside_solid << " solid inside, "
    << secs << " s (limit 300 s)";
  return {res.layers == 3 && outside == 0 && inside_solid > 0 && secs <= 300.0, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = fs::temp_directory_path() / "ynet_acceptance";
  for (int i = 1; i + 1 < argc; ++i)
    if (std::strcmp(argv[i], "--work-dir") == 0) work = argv[i + 1];
  fs::create_directories(work);

  // Passing ctest runs hide stdout, so the lines also go to a report file.
  std::ofstream log(work / "acceptance_report.txt");
  int failures = 0;
  auto report = [&](int id, const std::string& name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::ostringstream line;
    line << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << o.detail;
    std::cout << line.str() << std::endl;
    log << line.str() << std::endl;
  };

  report(1, "gradient suite", gradients);
  report(2, "tiling arithmetic", tiling);
  report(3, "architecture shapes", shapes);
  report(7, "serialization", [&] { return serialization(work); });
  const EndToEnd first = run_end_to_end(work / "run_a");
  report(4, "desk-scale end-to-end", [&] { return desk_scale(first); });
  report(5, "condition sweep", [&] { return sweep(first, work / "run_a"); });
  report(6, "merge ablation", [&] { return ablation(work / "ablation"); });
  const EndToEnd second = run_end_to_end(work / "run_b");
  report(8, "determinism", [&] { return determinism(first, second); });
  report(9, "component simulation", [&] { return component(first); });

  const std::string summary =
      failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed";
  std::cout << summary << std::endl;
  log << summary << std::endl;
  return failures == 0 ? 0 : 1;
}
