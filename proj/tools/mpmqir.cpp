// Copyright 2026 The mpmqir Authors.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// mpmqir: train-to-compress image codec on variational circuits.
//
//   mpmqir compress   IMAGE -o model.mpmq [--ansatz mpm --layers 15 ...]
//   mpmqir decompress model.mpmq -o out.pgm
//   mpmqir evaluate   --original a.pgm --recon b.pgm
//   mpmqir sweep      --dataset FILE --indices 0,1 --layers-list 5,10,15 -o sweep.csv
//   mpmqir compare    --dataset FILE --indices 0 --methods mpm,qcnn,qae --match-pcr 0.69 -o cmp.csv
//   mpmqir info       model.mpmq [--json]
//
// Exit codes: 0 success, 2 usage, 3 input format, 4 integrity, 5 training failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "mpmqir/ansatz.hpp"
#include "mpmqir/codec.hpp"
#include "mpmqir/dataio.hpp"
#include "mpmqir/error.hpp"
#include "mpmqir/metrics.hpp"
#include "mpmqir/train.hpp"

namespace {

using nlohmann::json;
using namespace mpmqir;
namespace fs = std::filesystem;

constexpr const char* kVersion = "mpmqir 1.0.0";

enum ExitCode { kOk = 0, kUsage = 2 };

struct InputSpec {
  std::string path;
  std::string format = "auto";
  std::size_t index = 0;
  std::string resize;  // "WxH", empty for none
};

std::pair<std::size_t, std::size_t> parse_geometry(const std::string& s) {
  const auto x = s.find('x');
  std::size_t w = 0, h = 0;
  try {
    if (x == std::string::npos) throw std::invalid_argument(s);
    w = std::stoul(s.substr(0, x));
    h = std::stoul(s.substr(x + 1));
  } catch (const std::exception&) {
    throw ConfigError("bad geometry '" + s + "', expected WxH");
  }
  if (w == 0 || h == 0) throw ConfigError("geometry must be non-empty");
  return {w, h};
}

std::string detect_format(const Bytes& b) {
  if (b.size() >= 2 && b[0] == 'P') return "pnm";
  if (b.size() >= 4 && b[0] == 0 && b[1] == 0 && b[2] == 8 && b[3] == 3) return "idx";
  if (!b.empty() && b.size() % kCifarRecordBytes == 0) return "cifar10";
  throw ParseError("cannot detect input format", 0);
}

ByteImage load_input(const InputSpec& in) {
  const Bytes bytes = read_file(in.path);
  std::string fmt = in.format;
  if (fmt == "mnist" || fmt == "fashion-mnist") fmt = "idx";
  if (fmt == "auto") fmt = detect_format(bytes);
  ByteImage img;
  if (fmt == "pnm") {
    img = parse_pnm(bytes);
  } else if (fmt == "idx") {
    auto all = parse_idx_images(bytes);
    if (in.index >= all.size())
      throw ConfigError("index " + std::to_string(in.index) + " out of range (" + std::to_string(all.size()) +
                        " images)");
    img = std::move(all[in.index]);
  } else if (fmt == "cifar10") {
    img = parse_cifar10(bytes, in.index);
  } else {
    throw ConfigError("unknown input format '" + in.format + "'");
  }
  if (!in.resize.empty()) {
    const auto [w, h] = parse_geometry(in.resize);
    img = denormalize(resize_area(normalize(img), w, h));
  }
  return img;
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// CLI11 reads an empty list element as 0; reject it instead.
const CLI::Validator kNonEmpty(
    [](std::string& v) { return v.empty() ? std::string("empty list element") : std::string(); }, "", "non-empty");

std::string format4(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Format, "cannot open '" + p.string() + "' for writing");
  out << text;
}

json config_json(const TrainConfig& c) {
  json j = {{"steps", c.steps},
            {"learning_rate", c.learning_rate},
            {"adam_beta1", c.adam_beta1},
            {"adam_beta2", c.adam_beta2},
            {"adam_eps", c.adam_eps},
            {"seed", c.seed},
            {"init", std::string(to_string(c.init))},
            {"init_scale", c.init_scale},
            {"log_every", c.log_every},
            {"gradient", std::string(to_string(c.gradient))},
            {"workers", c.workers}};
  j["target_psnr_db"] = c.target_psnr_db ? json(*c.target_psnr_db) : json(nullptr);
  return j;
}

json input_json(const InputSpec& in) {
  return {{"path", in.path}, {"format", in.format}, {"index", in.index}, {"resize", in.resize}};
}

// Training flags shared by compress, sweep and compare.
struct TrainFlags {
  TrainConfig cfg;
  std::optional<double> target_psnr;
  std::string init = "uniform";
  std::string gradient = "parameter-shift";

  void add(CLI::App* app, bool with_seed) {
    app->add_option("--steps", cfg.steps, "Adam steps per channel")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--lr", cfg.learning_rate, "Adam learning rate")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--beta1", cfg.adam_beta1, "Adam beta1")->check(CLI::Range(0.0, 0.999999))->capture_default_str();
    app->add_option("--beta2", cfg.adam_beta2, "Adam beta2")->check(CLI::Range(0.0, 0.999999))->capture_default_str();
    app->add_option("--adam-eps", cfg.adam_eps, "Adam epsilon")->check(CLI::PositiveNumber)->capture_default_str();
    if (with_seed) app->add_option("--seed", cfg.seed, "Initialization seed")->capture_default_str();
    app->add_option("--init", init, "Parameter initialization: uniform | normal")
        ->check(CLI::IsMember({"uniform", "normal"}))
        ->capture_default_str();
    app->add_option("--init-scale", cfg.init_scale, "Std-dev for --init normal")->capture_default_str();
    app->add_option("--log-every", cfg.log_every, "Trace record interval in steps")->capture_default_str();
    app->add_option("--target-psnr", target_psnr, "Stop early once PSNR (dB) reaches this value");
    app->add_option("--gradient", gradient, "Gradient method: parameter-shift | adjoint")
        ->check(CLI::IsMember({"parameter-shift", "adjoint"}))
        ->capture_default_str();
    app->add_option("--workers", cfg.workers, "Threads per gradient evaluation")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }

  TrainConfig resolve() const {
    TrainConfig c = cfg;
    c.target_psnr_db = target_psnr;
    c.init = parse_init_kind(init);
    c.gradient = parse_gradient_method(gradient);
    c.validate();
    return c;
  }
};

void add_input_flags(CLI::App* app, InputSpec& in) {
  app->add_option("--format", in.format, "Input format: auto | pnm | idx | mnist | fashion-mnist | cifar10")
      ->check(CLI::IsMember({"auto", "pnm", "idx", "mnist", "fashion-mnist", "cifar10"}))
      ->capture_default_str();
  app->add_option("--resize", in.resize, "Resample the input to WxH before compressing");
}

unsigned default_jobs() {
  if (const char* env = std::getenv("MPMQIR_JOBS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("MPMQIR_JOBS must be a positive integer, got '") + env + "'");
  }
  return 1;
}

// ---------------------------------------------------------------------------

// Every flag of a subcommand with its effective value, as a config file
// section that `mpmqir --config FILE compress` reads back.
std::string section_config(const CLI::App* sub) {
  std::istringstream in(sub->config_to_str(true, false));
  std::string out = "[" + sub->get_name() + "]\n", line;
  while (std::getline(in, line))
    if (!line.empty() && line.substr(line.size() - 2) != "\"\"") out += line + "\n";
  return out;
}

struct CompressCmd {
  InputSpec input;
  std::string ansatz = "mpm";
  unsigned layers = 15;
  TrainFlags train;
  unsigned jobs = 1;
  std::string output;
  std::string recon;

  CLI::App* app = nullptr;

  void add(CLI::App& root) {
    app = root.add_subcommand("compress", "Train a circuit per channel and write a checkpoint");
    app->add_option("input", input.path, "Input image (PGM/PPM, IDX, CIFAR-10 batch)")->required();
    app->add_option("--index", input.index, "Record index for dataset files")->capture_default_str();
    add_input_flags(app, input);
    app->add_option("--ansatz", ansatz, "Circuit family: mpm | qcnn | qae")
        ->check(CLI::IsMember({"mpm", "qcnn", "qae"}))
        ->capture_default_str();
    app->add_option("--layers", layers, "Circuit depth")->check(CLI::Range(1, 65535))->capture_default_str();
    train.add(app, true);
    app->add_option("--jobs", jobs, "Channels trained concurrently")->check(CLI::PositiveNumber);
    app->add_option("-o,--output", output, "Checkpoint path")->required();
    app->add_option("--recon", recon, "Also write the reconstructed image here");
    app->callback([this] { run(); });
  }

  std::string resolved_config() const { return section_config(app); }

  void run() {
    const auto t0 = std::chrono::steady_clock::now();
    CompressOptions opts;
    opts.ansatz = parse_ansatz_id(ansatz);
    opts.layers = layers;
    opts.train = train.resolve();
    opts.jobs = jobs;
    const ByteImage image = load_input(input);
    const CompressResult r = compress_image(image, opts);

    const fs::path out(output);
    write_checkpoint(out, r.checkpoint);
    const std::string base = out.string();
    json report = to_json(r.report);
    report["quantized"] = to_json(r.quantized_report);
    report["ansatz"] = ansatz;
    report["qubits"] = r.checkpoint.qubits;
    report["layers"] = layers;
    report["checkpoint_bytes"] = checkpoint_size(r.checkpoint.channels, r.checkpoint.n_theta());
    report["pcr_4dp"] = format4(*r.report.pcr);
    json traces = json::array();
    for (const auto& t : r.traces) traces.push_back(trace_to_json(t));
    write_text(base + ".report.json", report.dump(2) + "\n");
    write_text(base + ".trace.json", json{{"channels", traces}}.dump(2) + "\n");
    {
      std::ostringstream csv;
      csv << "channel,step,loss,psnr\n";
      for (std::size_t ch = 0; ch < r.traces.size(); ++ch)
        for (const auto& rec : r.traces[ch].records)
          csv << ch << ',' << rec.step << ',' << format_double(rec.loss) << ',' << format_double(rec.psnr) << '\n';
      write_text(base + ".trace.csv", csv.str());
    }
    write_text(base + ".config.toml", resolved_config());
    std::vector<std::string> outputs = {base, base + ".report.json", base + ".trace.json", base + ".trace.csv"};
    if (!recon.empty()) {
      write_pnm(recon, r.recon_bytes);
      outputs.push_back(recon);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json manifest = {{"command", "compress"},
                     {"tool_version", kVersion},
                     {"input", input_json(input)},
                     {"ansatz", ansatz},
                     {"qubits", r.checkpoint.qubits},
                     {"layers", layers},
                     {"width", image.width},
                     {"height", image.height},
                     {"channels", image.channels},
                     {"n_theta", r.checkpoint.n_theta()},
                     {"seed", opts.train.seed},
                     {"jobs", jobs},
                     {"train_config", config_json(opts.train)},
                     {"config_file", base + ".config.toml"},
                     {"outputs", outputs},
                     {"wall_clock_s", secs}};
    write_text(base + ".manifest.json", manifest.dump(2) + "\n");

    std::cout << "ansatz=" << ansatz << " m=" << r.checkpoint.qubits << " layers=" << layers
              << " params=" << r.checkpoint.n_theta() << " pcr=" << format4(*r.report.pcr)
              << " psnr=" << (r.report.identical() ? std::string("inf") : fixed2(r.report.mean_psnr_db))
              << " ssim=" << (r.report.mean_ssim ? fixed2(*r.report.mean_ssim) : std::string("n/a"))
              << " bytes=" << checkpoint_size(r.checkpoint.channels, r.checkpoint.n_theta()) << "\n";
  }
};

struct DecompressCmd {
  std::string model;
  std::string output;

  void add(CLI::App& root) {
    auto* app = root.add_subcommand("decompress", "Rebuild the image stored in a checkpoint");
    app->add_option("model", model, "Checkpoint (.mpmq)")->required();
    app->add_option("-o,--output", output, "Output PGM (1 channel) or PPM (3 channels)")->required();
    app->callback([this] { run(); });
  }

  void run() {
    const Checkpoint c = read_checkpoint(model);
    write_pnm(output, decode_checkpoint_to_image(c));
  }
};

struct EvaluateCmd {
  InputSpec original;
  InputSpec recon;
  std::string output;

  void add(CLI::App& root) {
    auto* app = root.add_subcommand("evaluate", "PSNR and SSIM of a reconstruction");
    app->add_option("--original", original.path, "Reference image")->required();
    app->add_option("--recon", recon.path, "Reconstructed image")->required();
    app->add_option("-o,--output", output, "Write the JSON report here instead of stdout");
    app->callback([this] { run(); });
  }

  void run() {
    const ByteImage a = load_input(original), b = load_input(recon);
    if (a.width != b.width || a.height != b.height || a.channels != b.channels)
      throw ConfigError("geometry mismatch: " + std::to_string(a.width) + "x" + std::to_string(a.height) + "x" +
                        std::to_string(a.channels) + " vs " + std::to_string(b.width) + "x" +
                        std::to_string(b.height) + "x" + std::to_string(b.channels));
    const std::string text = to_json(evaluate(normalize(a), normalize(b))).dump(2) + "\n";
    if (output.empty()) std::cout << text;
    else write_text(output, text);
  }
};

// One training run inside a sweep or comparison.
struct Cell {
  std::size_t index = 0;
  AnsatzId ansatz = AnsatzId::MPM;
  unsigned layers = 0;  // 0 = no layer count fits the budget
  std::uint64_t seed = 0;
  std::string status = "ok";
  std::size_t n_theta = 0;
  double pcr = 0.0;
  double psnr = 0.0;
  std::optional<double> ssim;
  double mse = 0.0;
  std::size_t steps = 0;
  double secs = 0.0;

  static Cell make(std::size_t index, AnsatzId ansatz, unsigned layers, std::uint64_t seed) {
    Cell c;
    c.index = index;
    c.ansatz = ansatz;
    c.layers = layers;
    c.seed = seed;
    return c;
  }
};

void run_cell(Cell& cell, const ByteImage& image, const TrainConfig& base) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (cell.layers == 0) throw ConfigError("parameter budget is below one layer");
    CompressOptions o;
    o.ansatz = cell.ansatz;
    o.layers = cell.layers;
    o.train = base;
    o.train.seed = cell.seed;
    const CompressResult r = compress_image(image, o);
    cell.n_theta = r.checkpoint.n_theta();
    cell.pcr = *r.report.pcr;
    cell.psnr = r.report.mean_psnr_db;
    cell.ssim = r.report.mean_ssim;
    double mse = 0.0, steps = 0.0;
    for (const auto& t : r.traces) {
      mse += t.final_loss;
      steps = std::max(steps, static_cast<double>(t.steps_run));
    }
    cell.mse = mse / static_cast<double>(r.traces.size());
    cell.steps = static_cast<std::size_t>(steps);
  } catch (const std::exception& e) {
    cell.status = std::string("error: ") + e.what();
  }
  cell.secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string cells_csv(const std::vector<Cell>& cells, const std::string& dataset, const char* method_col) {
  std::ostringstream os;
  os << "dataset,index," << method_col << ",layers,seed,n_theta,pcr,psnr_db,ssim,final_mse,steps,wall_clock_s,status\n";
  for (const auto& c : cells) {
    const bool ok = c.status == "ok";
    os << csv_escape(dataset) << ',' << c.index << ',' << to_string(c.ansatz) << ',' << c.layers << ',' << c.seed
       << ',' << (ok ? std::to_string(c.n_theta) : "") << ',' << (ok ? format4(c.pcr) : "") << ','
       << (ok ? format_double(c.psnr) : "") << ',' << (ok && c.ssim ? format_double(*c.ssim) : "") << ','
       << (ok ? format_double(c.mse) : "") << ',' << (ok ? std::to_string(c.steps) : "") << ','
       << format_double(c.secs) << ',' << csv_escape(c.status) << '\n';
  }
  return os.str();
}

std::vector<ByteImage> load_indices(const InputSpec& base, const std::vector<std::size_t>& indices) {
  std::vector<ByteImage> images;
  for (std::size_t i : indices) {
    InputSpec in = base;
    in.index = i;
    images.push_back(load_input(in));
  }
  return images;
}

void run_cells(std::vector<Cell>& cells, const std::vector<std::size_t>& indices, const std::vector<ByteImage>& images,
               const TrainConfig& cfg, unsigned jobs) {
  detail::parallel_for(cells.size(), jobs, [&](std::size_t k) {
    const auto pos = std::find(indices.begin(), indices.end(), cells[k].index) - indices.begin();
    run_cell(cells[k], images[static_cast<std::size_t>(pos)], cfg);
  });
}

struct SweepCmd {
  InputSpec input;
  std::vector<std::size_t> indices;
  std::string ansatz = "mpm";
  std::vector<unsigned> layers_list;
  std::vector<std::uint64_t> seeds = {42};
  TrainFlags train;
  unsigned jobs = 1;
  std::string output;

  void add(CLI::App& root) {
    auto* app = root.add_subcommand("sweep", "Train across layer counts and seeds; one CSV row per run");
    app->add_option("--dataset", input.path, "Dataset or image file")->required();
    add_input_flags(app, input);
    app->add_option("--indices", indices, "Comma-separated record indices")->delimiter(',')->check(kNonEmpty)->required();
    app->add_option("--ansatz", ansatz, "Circuit family: mpm | qcnn | qae")
        ->check(CLI::IsMember({"mpm", "qcnn", "qae"}))
        ->capture_default_str();
    app->add_option("--layers-list", layers_list, "Comma-separated layer counts")
        ->delimiter(',')->check(kNonEmpty)
        ->check(CLI::Range(1, 65535))
        ->required();
    app->add_option("--seeds", seeds, "Comma-separated seeds")->delimiter(',')->check(kNonEmpty)->capture_default_str();
    train.add(app, false);
    app->add_option("--jobs", jobs, "Runs trained concurrently")->check(CLI::PositiveNumber);
    app->add_option("-o,--output", output, "CSV output path")->required();
    app->callback([this] { run(); });
  }

  void run() {
    if (indices.empty()) throw ConfigError("--indices is empty");
    if (layers_list.empty()) throw ConfigError("--layers-list is empty");
    if (seeds.empty()) throw ConfigError("--seeds is empty");
    const TrainConfig cfg = train.resolve();
    const AnsatzId id = parse_ansatz_id(ansatz);
    const auto images = load_indices(input, indices);
    std::vector<Cell> cells;
    for (std::size_t i : indices)
      for (unsigned l : layers_list)
        for (auto s : seeds) cells.push_back(Cell::make(i, id, l, s));
    run_cells(cells, indices, images, cfg, jobs);
    write_text(output, cells_csv(cells, input.path, "ansatz"));
  }
};

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct CompareCmd {
  InputSpec input;
  std::vector<std::size_t> indices;
  std::vector<std::string> methods = {"mpm", "qcnn", "qae"};
  double match_pcr = 0.0;
  std::vector<std::uint64_t> seeds = {42};
  TrainFlags train;
  unsigned jobs = 1;
  std::string output;
  std::string summary;

  void add(CLI::App& root) {
    auto* app = root.add_subcommand("compare", "Compare circuit families at a matched parameter budget");
    app->add_option("--dataset", input.path, "Dataset or image file")->required();
    add_input_flags(app, input);
    app->add_option("--indices", indices, "Comma-separated record indices")->delimiter(',')->check(kNonEmpty)->required();
    app->add_option("--methods", methods, "Comma-separated circuit families")
        ->delimiter(',')->check(kNonEmpty)
        ->check(CLI::IsMember({"mpm", "qcnn", "qae"}))
        ->capture_default_str();
    app->add_option("--match-pcr", match_pcr, "Parameter budget as a fraction of the pixel count")
        ->check(CLI::PositiveNumber)
        ->required();
    app->add_option("--seeds", seeds, "Comma-separated seeds")->delimiter(',')->check(kNonEmpty)->capture_default_str();
    train.add(app, false);
    app->add_option("--jobs", jobs, "Runs trained concurrently")->check(CLI::PositiveNumber);
    app->add_option("-o,--output", output, "CSV output path")->required();
    app->add_option("--summary", summary, "JSON summary path (default: <output>.summary.json)");
    app->callback([this] { run(); });
  }

  void run() {
    if (indices.empty()) throw ConfigError("--indices is empty");
    if (methods.empty()) throw ConfigError("--methods is empty");
    if (seeds.empty()) throw ConfigError("--seeds is empty");
    const TrainConfig cfg = train.resolve();
    const auto images = load_indices(input, indices);
    const std::size_t pixels = images.front().pixels();
    for (const auto& im : images)
      if (im.pixels() != pixels) throw ConfigError("compare needs images of one geometry");
    const unsigned m = qubits_for_pixels(pixels);
    // N_theta / pixels <= match_pcr; the epsilon absorbs decimal rounding of the target.
    const auto budget = static_cast<std::size_t>(std::floor(match_pcr * static_cast<double>(pixels) + 1e-9));

    std::vector<Cell> cells;
    std::vector<std::pair<AnsatzId, unsigned>> plan;
    for (const auto& name : methods) {
      const AnsatzId id = parse_ansatz_id(name);
      plan.emplace_back(id, max_layers_within(id, m, budget));
    }
    for (std::size_t i : indices)
      for (const auto& [id, layers] : plan)
        for (auto s : seeds) cells.push_back(Cell::make(i, id, layers, s));
    run_cells(cells, indices, images, cfg, jobs);
    write_text(output, cells_csv(cells, input.path, "method"));

    json per_method = json::array();
    double best_psnr = -std::numeric_limits<double>::infinity();
    std::size_t best = 0;
    for (std::size_t k = 0; k < plan.size(); ++k) {
      const auto [id, layers] = plan[k];
      std::vector<double> mses, psnrs, ssims;
      std::size_t failures = 0;
      for (const auto& c : cells) {
        if (c.ansatz != id) continue;
        if (c.status != "ok") {
          ++failures;
          continue;
        }
        mses.push_back(c.mse);
        psnrs.push_back(c.psnr);
        if (c.ssim) ssims.push_back(*c.ssim);
      }
      auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
      };
      json e = {{"method", std::string(to_string(id))}, {"layers", layers}, {"runs", mses.size()}, {"failures", failures}};
      if (layers > 0) {
        const std::size_t n = param_count(id, m, layers);
        e["n_theta"] = n;
        e["pcr"] = pcr(n, images.front().width, images.front().height);
        e["pcr_4dp"] = format4(e["pcr"].get<double>());
      }
      if (!mses.empty()) {
        e["mean_psnr_db"] = mean(psnrs);
        e["median_mse"] = median(mses);
        e["mean_ssim"] = ssims.empty() ? json(nullptr) : json(mean(ssims));
        if (mean(psnrs) > best_psnr) {
          best_psnr = mean(psnrs);
          best = k;
        }
      }
      per_method.push_back(e);
    }
    for (std::size_t k = 0; k < per_method.size(); ++k) per_method[k]["best_psnr"] = std::isfinite(best_psnr) && k == best;
    json s = {{"dataset", input.path},
              {"indices", indices},
              {"target_pcr", match_pcr},
              {"parameter_budget", budget},
              {"qubits", m},
              {"train_config", config_json(cfg)},
              {"seeds", seeds},
              {"methods", per_method}};
    write_text(summary.empty() ? output + ".summary.json" : summary, s.dump(2) + "\n");
  }
};

struct InfoCmd {
  std::string model;
  bool as_json = false;

  void add(CLI::App& root) {
    auto* app = root.add_subcommand("info", "Print checkpoint header fields without decoding");
    app->add_option("model", model, "Checkpoint (.mpmq)")->required();
    app->add_flag("--json", as_json, "Machine-readable output");
    app->callback([this] { run(); });
  }

  void run() {
    const Checkpoint c = read_checkpoint(model);
    const std::size_t n = c.n_theta();
    const double ratio = pcr(n, c.width, c.height);
    const std::size_t bytes = checkpoint_size(c.channels, n);
    if (as_json) {
      json stats = json::array();
      for (const auto& s : c.stats) stats.push_back({{"mu", s.mu}, {"sigma", s.sigma}});
      std::cout << json{{"ansatz", std::string(to_string(c.ansatz))},
                        {"qubits", c.qubits},
                        {"layers", c.layers},
                        {"width", c.width},
                        {"height", c.height},
                        {"channels", c.channels},
                        {"n_theta", n},
                        {"pcr", ratio},
                        {"pcr_4dp", format4(ratio)},
                        {"bytes", bytes},
                        {"stats", stats}}
                       .dump(2)
                << "\n";
      return;
    }
    std::cout << "ansatz=" << to_string(c.ansatz) << " m=" << c.qubits << " layers=" << c.layers << " params=" << n
              << " pcr=" << format4(ratio) << "\n"
              << "image=" << c.width << "x" << c.height << "x" << c.channels << " bytes=" << bytes << "\n";
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Image compression by measurement-probability matching on variational circuits"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "Read flags from a TOML/INI file");
  app.require_subcommand(1);

  unsigned jobs = 1;
  try {
    jobs = default_jobs();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  }
  CompressCmd compress;
  DecompressCmd decompress;
  EvaluateCmd evaluate_cmd;
  SweepCmd sweep;
  CompareCmd compare;
  InfoCmd info;
  compress.jobs = sweep.jobs = compare.jobs = jobs;
  compress.add(app);
  decompress.add(app);
  evaluate_cmd.add(app);
  sweep.add(app);
  compare.add(app);
  info.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kOk;
}
