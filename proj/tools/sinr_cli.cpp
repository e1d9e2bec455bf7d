// sinr: command-line front end for initialization, training, expansion,
// spectra and the verification battery.
//
// Every run resolves its configuration (defaults < config file < flags),
// hashes it into a run id and writes its artifacts plus manifest.json under
// out_dir/<run-id>/.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sinr/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sinr;

namespace {

constexpr const char* kVersion = "1.0.0";

// Keys with a null default are derived from other keys when resolved.
json defaults() {
  return {
      {"seed", nullptr},
      {"init", "structured"},
      {"m", 64},
      {"widths", {128}},
      {"d", 2},
      {"channels", 1},
      {"nyquist", 21},
      {"threshold", nullptr},
      {"low_limit", 2},
      {"low_fraction", 0.7},
      {"period", 2.0},
      {"bound_mode", "clamped"},
      {"c_low", 1.0},
      {"c_high", 0.2},
      {"bound_deep", 1.0},
      {"c_init", 0.5},
      {"reg_weight", 1e-6},
      {"epochs", 2000},
      {"lr", 1e-4},
      {"test_fraction", 0.1},
      {"batch_size", 0},
      {"eval_interval", 1},
      {"train_shifts", false},
      {"checkpoint_interval", 0},
      {"image_in", ""},
      {"image_size", 64},
      {"image_band", nullptr},
      {"out_dir", "runs"},
      {"k_max", 8},
      {"band", nullptr},
      {"grid_n", nullptr},
  };
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json parse_json_file(const std::string& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
}

// "key=value": value is read as JSON when it parses, else as a string.
std::pair<std::string, json> parse_assignment(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + s + "'");
  const std::string key = s.substr(0, eq), text = s.substr(eq + 1);
  json v = json::parse(text, nullptr, false);
  if (v.is_discarded()) v = text;
  return {key, v};
}

template <typename T>
T get(const json& cfg, const char* key) {
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

int next_power_of_two(int n) {
  int p = 1;
  while (p < n) p *= 2;
  return p;
}

/// defaults < file < overrides; unknown keys are rejected and derived keys filled in.
json resolve_config(const std::string& path, const std::vector<std::pair<std::string, json>>& overrides,
                    bool need_seed) {
  json cfg = defaults();
  auto merge = [&](const std::string& key, const json& v) {
    if (!cfg.contains(key)) throw ConfigError("unknown config key '" + key + "'");
    cfg[key] = v;
  };
  if (!path.empty()) {
    const json file = parse_json_file(path);
    if (!file.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [k, v] : file.items()) merge(k, v);
  }
  for (const auto& [k, v] : overrides) merge(k, v);

  if (cfg["seed"].is_null()) {
    if (need_seed) throw ConfigError("config key 'seed' is mandatory");
  } else if (!cfg["seed"].is_number_unsigned()) {
    throw ConfigError("seed must be a non-negative integer");
  }
  const int nyquist = get<int>(cfg, "nyquist");
  if (cfg["threshold"].is_null()) cfg["threshold"] = std::max(nyquist / 3, get<int>(cfg, "low_limit") + 1);
  if (cfg["image_band"].is_null()) cfg["image_band"] = nyquist;
  if (cfg["band"].is_null()) cfg["band"] = nyquist;
  if (cfg["grid_n"].is_null()) cfg["grid_n"] = next_power_of_two(2 * get<int>(cfg, "band") + 2);
  const std::string init = get<std::string>(cfg, "init");
  if (init != "structured" && init != "uniform") throw ConfigError("init must be 'structured' or 'uniform'");
  parse_bound_mode(get<std::string>(cfg, "bound_mode"));
  if (get<int>(cfg, "k_max") < 0) throw ConfigError("k_max must be non-negative");
  if (get<int>(cfg, "image_size") < 2) throw ConfigError("image_size must be at least 2");
  const std::string image = get<std::string>(cfg, "image_in");
  if (!image.empty() && !fs::exists(image)) throw IoError("image_in not found: " + image);
  return cfg;
}

InitSpec init_spec(const json& cfg) {
  InitSpec s;
  s.m = get<int>(cfg, "m");
  s.widths = get<std::vector<int>>(cfg, "widths");
  s.d = get<int>(cfg, "d");
  s.channels = get<int>(cfg, "channels");
  s.nyquist = get<int>(cfg, "nyquist");
  s.threshold = get<int>(cfg, "threshold");
  s.low_limit = get<int>(cfg, "low_limit");
  s.low_fraction = get<double>(cfg, "low_fraction");
  s.period = get<double>(cfg, "period");
  s.bound_low = get<double>(cfg, "c_low");
  s.bound_high = get<double>(cfg, "c_high");
  s.bound_deep = get<double>(cfg, "bound_deep");
  s.c_init = get<double>(cfg, "c_init");
  s.bound_mode = parse_bound_mode(get<std::string>(cfg, "bound_mode"));
  s.seed = get<std::uint64_t>(cfg, "seed");
  return s;
}

SinusoidalNet make_net(const json& cfg) {
  const InitSpec s = init_spec(cfg);
  return get<std::string>(cfg, "init") == "uniform" ? init_uniform_baseline(s) : init_net(s);
}

TrainOptions train_options(const json& cfg, int depth) {
  TrainOptions o;
  o.epochs = get<int>(cfg, "epochs");
  o.adam.lr = get<double>(cfg, "lr");
  o.seed = get<std::uint64_t>(cfg, "seed");
  o.test_fraction = get<double>(cfg, "test_fraction");
  o.batch_size = get<int>(cfg, "batch_size");
  o.eval_interval = get<int>(cfg, "eval_interval");
  o.train_shifts = get<bool>(cfg, "train_shifts");
  o.checkpoint_interval = get<int>(cfg, "checkpoint_interval");
  o.bound.mode = parse_bound_mode(get<std::string>(cfg, "bound_mode"));
  o.bound.c_low = get<double>(cfg, "c_low");
  o.bound.c_high = get<double>(cfg, "c_high");
  o.bound.c_deep = depth > 1 ? get<double>(cfg, "bound_deep") : 0.0;
  o.bound.c_init = get<double>(cfg, "c_init");
  o.bound.reg_weight = get<double>(cfg, "reg_weight");
  o.bound.low_limit = get<int>(cfg, "low_limit");
  return o;
}

/// Output directory of one run; the manifest is written last.
class RunDir {
 public:
  RunDir(std::string command, json config, json inputs = json::object())
      : manifest_{{"tool", "sinr"}, {"version", kVersion}, {"command", std::move(command)},
                  {"config", std::move(config)}, {"inputs", std::move(inputs)}} {
    const json id_source = {manifest_["command"], manifest_["config"], manifest_["inputs"]};
    id_ = hex(fnv1a(id_source.dump()));
    manifest_["run_id"] = id_;
    dir_ = fs::path(manifest_["config"].value("out_dir", std::string("runs"))) / id_;
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create " + dir_.string() + ": " + ec.message());
  }

  std::string path(const std::string& name) {
    manifest_["artifacts"].push_back(name);
    return (dir_ / name).string();
  }
  const fs::path& dir() const { return dir_; }
  json& results() { return manifest_["results"]; }

  void finish() {
    std::ofstream out(dir_ / "manifest.json");
    out << manifest_.dump(2) << '\n';
    if (!out) throw IoError("cannot write manifest in " + dir_.string());
  }

 private:
  json manifest_;
  std::string id_;
  fs::path dir_;
};

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

void write_json(const std::string& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

void copy_to(const std::string& from, const std::string& to) {
  if (to.empty()) return;
  std::error_code ec;
  fs::copy_file(from, to, fs::copy_options::overwrite_existing, ec);
  if (ec) throw IoError("cannot write " + to + ": " + ec.message());
}

json nan_to_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Net-based commands key their run id on the net file contents.
json net_inputs(const std::string& net_path) { return {{"net", net_path}, {"net_fnv1a", hex(fnv1a(read_text(net_path)))}}; }

void write_spectrum(RunDir& run, const SinusoidalNet& net, int grid_n, int band) {
  const SpectrumGrid g = sample_and_dft(net, grid_n, band);
  {
    auto out = open_out(run.path("spectrum.csv"));
    write_spectrum_csv(out, g);
  }
  if (g.dim <= 2) write_pnm(spectrum_image(g), run.path("spectrum.pgm"));
  const BandlimitError be = bandlimit_error(g, band);
  run.results()["spectrum"] = {{"grid_n", grid_n},
                               {"band", band},
                               {"bandlimit_error_empirical", be.total},
                               {"bandlimit_error_by_channel", be.by_channel},
                               {"parseval_residual", parseval_residual(g)}};
}

// ---------------------------------------------------------------------------
// Commands

int cmd_init(const json& cfg, const std::string& out) {
  RunDir run("init", cfg);
  const SinusoidalNet net = make_net(cfg);
  const std::string path = run.path("net.json");
  save_net(net, path);
  copy_to(path, out);
  run.finish();
  std::cout << path << '\n';
  return 0;
}

int cmd_train(json cfg, const std::string& net_path) {
  const std::string image_path = get<std::string>(cfg, "image_in");
  ImageGrid image;
  if (image_path.empty()) {
    const int n = get<int>(cfg, "image_size");
    image = synthetic_image(n, n, get<int>(cfg, "image_band"), get<std::uint64_t>(cfg, "seed") + 1000,
                            get<int>(cfg, "channels"));
  } else {
    image = read_pnm(image_path);
  }
  cfg["channels"] = image.channels;
  json inputs = json::object();
  if (!image_path.empty()) inputs["image_fnv1a"] = hex(fnv1a(read_text(image_path)));
  if (!net_path.empty()) inputs.update(net_inputs(net_path));
  RunDir run("train", cfg, inputs);

  const SinusoidalNet net0 = net_path.empty() ? make_net(cfg) : load_net(net_path);
  if (net0.input_dim() != 2) throw DimensionError("image training needs a 2-D net");
  const Dataset ds = to_dataset(image, net0.bank.period);
  TrainOptions opt = train_options(cfg, net0.depth());
  if (opt.checkpoint_interval > 0) {
    opt.checkpoint_dir = (run.dir() / "checkpoints").string();
    fs::create_directories(opt.checkpoint_dir);
  }
  const TrainRun tr = train(net0, ds, opt);

  {
    auto out = open_out(run.path("history.csv"));
    write_history_csv(out, tr.history);
  }
  save_net(tr.net, run.path("net.json"));

  const MatrixXd pred = forward(tr.net, ds.coords);
  ImageGrid recon = from_values(pred, image.width, image.height);
  if (recon.channels == 1) {
    ImageGrid rgb = recon;
    rgb.channels = 3;
    rgb.data.clear();
    for (double v : recon.data) rgb.data.insert(rgb.data.end(), 3, v);
    recon = std::move(rgb);
  }
  write_pnm(recon, run.path("recon.ppm"));

  std::vector<double> gray(static_cast<std::size_t>(pred.rows()));
  for (Eigen::Index i = 0; i < pred.rows(); ++i) gray[static_cast<std::size_t>(i)] = pred.row(i).mean();
  std::vector<double> mag = sobel_magnitude(gray, image.width, image.height);
  const double top = *std::max_element(mag.begin(), mag.end());
  if (top > 0.0)
    for (double& v : mag) v /= top;
  write_pnm(unit_image(mag, image.width, image.height), run.path("gradmap.pgm"));

  const int band = get<int>(cfg, "band");
  write_spectrum(run, tr.net, get<int>(cfg, "grid_n"), band);
  run.results()["final"] = {{"train_psnr", nan_to_null(tr.final.train_psnr)},
                            {"test_psnr", nan_to_null(tr.final.test_psnr)},
                            {"grad_psnr", nan_to_null(tr.final.grad_psnr)},
                            {"grad_psnr_all", nan_to_null(tr.final.grad_psnr_all)},
                            {"loss", nan_to_null(tr.final.loss)},
                            {"epochs", static_cast<int>(tr.history.size())}};
  run.finish();
  std::cout << run.dir().string() << '\n';
  return 0;
}

int cmd_expand(const json& cfg, const std::string& net_path, int neuron, const std::string& out) {
  RunDir run("expand", {{"neuron", neuron}, {"k_max", cfg["k_max"]}, {"out_dir", cfg["out_dir"]}},
             net_inputs(net_path));
  const SinusoidalNet net = load_net(net_path);
  const NeuronExpansion ex = expand_neuron(net, neuron, get<int>(cfg, "k_max"));
  const std::string path = run.path("terms.csv");
  {
    auto f = open_out(path);
    write_terms_csv(f, ex.terms, net.input_width(), net.input_dim());
  }
  write_json(run.path("terms.json"), {{"neuron", neuron},
                                      {"k_max", ex.k_max},
                                      {"terms", ex.terms.size()},
                                      {"tail_bound", ex.tail_bound},
                                      {"truncation_bound", ex.truncation_bound},
                                      {"pruned_mass", ex.pruned_mass}});
  copy_to(path, out);
  run.finish();
  std::cout << path << '\n';
  return 0;
}

int cmd_fourier(const json& cfg, const std::string& net_path) {
  RunDir run("fourier", {{"band", cfg["band"]}, {"k_max", cfg["k_max"]}, {"out_dir", cfg["out_dir"]}},
             net_inputs(net_path));
  const SinusoidalNet net = load_net(net_path);
  const FourierTable t = fourier_table(net, get<int>(cfg, "band"), get<int>(cfg, "k_max"));
  {
    auto f = open_out(run.path("fourier.csv"));
    write_fourier_csv(f, t);
  }
  json side = fourier_sidecar(t);
  side["bandlimit_error_expansion"] = bandlimit_error(t, t.band).total;
  write_json(run.path("fourier.json"), side);
  run.finish();
  std::cout << run.dir().string() << '\n';
  return 0;
}

int cmd_spectrum(const json& cfg, const std::string& net_path) {
  RunDir run("spectrum", {{"grid_n", cfg["grid_n"]}, {"band", cfg["band"]}, {"out_dir", cfg["out_dir"]}},
             net_inputs(net_path));
  const SinusoidalNet net = load_net(net_path);
  write_spectrum(run, net, get<int>(cfg, "grid_n"), get<int>(cfg, "band"));
  run.finish();
  std::cout << run.dir().string() << '\n';
  return 0;
}

int cmd_subperiod(const json& cfg, const std::string& net_path, int qmax) {
  if (qmax < 1) throw ConfigError("qmax must be positive");
  RunDir run("subperiod", {{"qmax", qmax}, {"out_dir", cfg["out_dir"]}}, net_inputs(net_path));
  const SinusoidalNet net = load_net(net_path);
  const int d = net.input_dim();
  static const char* names[] = {"q", "s", "t"};
  std::ostringstream table;
  for (int a = 0; a < d; ++a) table << names[a] << ',';
  table << "verdict\n";
  std::vector<int> q(static_cast<std::size_t>(d), 1);
  // Every divisor tuple in [1, qmax]^d except the full period itself.
  for (;;) {
    int a = d - 1;
    while (a >= 0 && q[static_cast<std::size_t>(a)] == qmax) q[static_cast<std::size_t>(a--)] = 1;
    if (a < 0) break;
    ++q[static_cast<std::size_t>(a)];
    for (int v : q) table << v << ',';
    table << (subperiod_check(net.bank, q) ? "true" : "false") << '\n';
  }
  {
    auto f = open_out(run.path("subperiod.csv"));
    f << table.str();
  }
  run.finish();
  std::cout << table.str();
  return 0;
}

int cmd_gradcheck(const json& cfg, const std::string& net_path, int samples, double h, bool shifts) {
  RunDir run("gradcheck", {{"seed", cfg["seed"]}, {"samples", samples}, {"h", h}, {"shifts", shifts},
                           {"out_dir", cfg["out_dir"]}},
             net_inputs(net_path));
  const SinusoidalNet net = load_net(net_path);
  const GradCheckReport rep = gradcheck(net, get<std::uint64_t>(cfg, "seed"), samples, h, shifts);
  const double worst = std::max(rep.max_rel_input, rep.max_rel_param);
  const json report = {{"max_rel_input", rep.max_rel_input},
                       {"max_rel_param", rep.max_rel_param},
                       {"max_rel", worst},
                       {"tolerance", 1e-5},
                       {"passed", worst <= 1e-5}};
  run.results()["gradcheck"] = report;
  run.finish();
  std::cout << report.dump() << '\n';
  return worst <= 1e-5 ? 0 : 1;
}

int cmd_verify(const std::string& suite) {
  verify::suite_members(suite);  // rejects unknown suites before anything runs
  int failed = 0;
  verify::run_suite(suite, [&](const verify::CheckResult& r) {
    std::cout << verify::format(r) << std::endl;
    if (!r.passed) ++failed;
  });
  return failed ? 1 : 0;
}

int report_error(const char* kind, const std::string& message, int code) {
  std::cerr << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sinr: bandlimit-controlled sinusoidal networks"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path, net_path, out_path, out_dir, suite = "all";
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs, k_max, band, grid_n;
  std::optional<double> lr;
  std::optional<std::string> image_in, bound_mode;
  int threads = 1, neuron = 0, qmax = 4, samples = 4;
  double h = 1e-5;
  bool shifts = false;

  app.add_option("--threads", threads, "Worker cap")->check(CLI::PositiveNumber);
  auto common = [&](CLI::App* c, bool with_config) {
    if (with_config) {
      c->add_option("-c,--config", config_path, "JSON config file");
      c->add_option("--set", sets, "Override a config key: key=value");
    }
    c->add_option("--out-dir", out_dir, "Root output directory");
  };

  auto* init = app.add_subcommand("init", "Initialize a network");
  common(init, true);
  init->add_option("--seed", seed);
  init->add_option("-o,--out", out_path, "Also copy net.json here");

  auto* trn = app.add_subcommand("train", "Train on an image");
  common(trn, true);
  trn->add_option("--seed", seed);
  trn->add_option("--epochs", epochs);
  trn->add_option("--lr", lr);
  trn->add_option("--image", image_in, "PGM/PPM input (synthetic image if omitted)");
  trn->add_option("--bound-mode", bound_mode, "none, clamped or learnable");
  trn->add_option("--net", net_path, "Start from this net instead of initializing")->check(CLI::ExistingFile);

  auto* exp = app.add_subcommand("expand", "Bessel expansion of one first-layer neuron");
  common(exp, false);
  exp->add_option("--net", net_path)->required();
  exp->add_option("--neuron", neuron);
  exp->add_option("--kmax", k_max);
  exp->add_option("-o,--out", out_path, "Also copy terms.csv here");

  auto* fou = app.add_subcommand("fourier", "Fourier table from the expansion");
  common(fou, false);
  fou->add_option("--net", net_path)->required();
  fou->add_option("--band", band);
  fou->add_option("--kmax", k_max);

  auto* spe = app.add_subcommand("spectrum", "Sampled DFT spectrum");
  common(spe, false);
  spe->add_option("--net", net_path)->required();
  spe->add_option("--grid", grid_n);
  spe->add_option("--band", band);

  auto* sub = app.add_subcommand("subperiod", "Sub-period table");
  common(sub, false);
  sub->add_option("--net", net_path)->required();
  sub->add_option("--qmax", qmax);

  auto* gc = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  common(gc, false);
  gc->add_option("--net", net_path)->required();
  gc->add_option("--seed", seed)->required();
  gc->add_option("--samples", samples)->check(CLI::PositiveNumber);
  gc->add_option("--step", h)->check(CLI::PositiveNumber);
  gc->add_flag("--shifts", shifts, "Also check the phase shifts");

  auto* ver = app.add_subcommand("verify", "Run the property/oracle battery");
  ver->add_option("--suite", suite, "all, fast or A1..A11");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("config", e.what(), 2);
  }

  try {
    Eigen::setNbThreads(threads);
    if (ver->parsed()) return cmd_verify(suite);

    std::vector<std::pair<std::string, json>> overrides;
    for (const auto& s : sets) overrides.push_back(parse_assignment(s));
    if (seed) overrides.emplace_back("seed", *seed);
    if (epochs) overrides.emplace_back("epochs", *epochs);
    if (lr) overrides.emplace_back("lr", *lr);
    if (image_in) overrides.emplace_back("image_in", *image_in);
    if (bound_mode) overrides.emplace_back("bound_mode", *bound_mode);
    if (k_max) overrides.emplace_back("k_max", *k_max);
    if (band) overrides.emplace_back("band", *band);
    if (grid_n) overrides.emplace_back("grid_n", *grid_n);
    if (!out_dir.empty()) overrides.emplace_back("out_dir", out_dir);
    if (!net_path.empty() && !fs::exists(net_path)) throw IoError("net not found: " + net_path);

    const bool seeded = init->parsed() || trn->parsed() || gc->parsed();
    const json cfg = resolve_config(config_path, overrides, seeded);
    if (init->parsed()) return cmd_init(cfg, out_path);
    if (trn->parsed()) return cmd_train(cfg, net_path);
    if (exp->parsed()) return cmd_expand(cfg, net_path, neuron, out_path);
    if (fou->parsed()) return cmd_fourier(cfg, net_path);
    if (spe->parsed()) return cmd_spectrum(cfg, net_path);
    if (sub->parsed()) return cmd_subperiod(cfg, net_path, qmax);
    if (gc->parsed()) return cmd_gradcheck(cfg, net_path, samples, h, shifts);
  } catch (const IoError& e) {
    return report_error("io", e.what(), 4);
  } catch (const NumericalError& e) {
    return report_error("numerical", e.what(), 3);
  } catch (const Error& e) {
    return report_error(to_string(e.kind()), e.what(), 2);
  } catch (const fs::filesystem_error& e) {
    return report_error("io", e.what(), 4);
  } catch (const json::exception& e) {
    return report_error("config", e.what(), 2);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), 3);
  }
  return 2;
}
