#include "chaoslab/runner.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "chaoslab/seed.hpp"
#include "chaoslab/topology.hpp"

namespace chaoslab {

using nlohmann::json;

namespace {

std::atomic<bool> g_interrupted{false};

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + offset, '\n'));
}

// nlohmann::json keeps no source positions; schema errors are located at the
// first occurrence of the offending key.
class Schema {
 public:
  explicit Schema(std::string_view text) : text_(text) {}

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    const std::size_t dot = path.find_last_of(".]");
    std::string key = dot == std::string::npos ? path : path.substr(dot + 1);
    std::size_t line = 0;
    if (!key.empty()) {
      const auto pos = text_.find("\"" + key + "\"");
      if (pos != std::string_view::npos) line = line_of_offset(text_, pos);
    }
    throw ConfigError(path, line, what);
  }

  void allow_keys(const json& obj, const std::string& path,
                  std::initializer_list<std::string_view> keys) const {
    for (const auto& [key, value] : obj.items()) {
      if (std::find(keys.begin(), keys.end(), key) == keys.end())
        fail(join(path, key), "unknown key");
    }
  }

  double number(const json& v, const std::string& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }

  double positive(const json& v, const std::string& path) const {
    const double x = number(v, path);
    if (!(x > 0.0)) fail(path, "must be positive");
    return x;
  }

  std::int64_t integer(const json& v, const std::string& path) const {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<std::int64_t>();
  }

  std::size_t count(const json& v, const std::string& path, std::size_t min = 1) const {
    const std::int64_t x = integer(v, path);
    if (x < std::int64_t(min)) fail(path, "must be at least " + std::to_string(min));
    return static_cast<std::size_t>(x);
  }

  std::uint64_t seed(const json& v, const std::string& path) const {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
    fail(path, "expected a non-negative integer seed");
  }

  std::string string(const json& v, const std::string& path) const {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const json& v, const std::string& path) const {
    if (!v.is_boolean()) fail(path, "expected true or false");
    return v.get<bool>();
  }

  /// A scalar or a non-empty array of scalars.
  std::vector<double> number_grid(const json& v, const std::string& path) const {
    std::vector<double> out;
    if (v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
    } else {
      out.push_back(number(v, path));
    }
    if (out.empty()) fail(path, "grid must be non-empty");
    return out;
  }

  static std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
  }

 private:
  std::string_view text_;
};

ModelFamily parse_family(const Schema& s, const json& v, const std::string& path) {
  const std::string name = s.string(v, path);
  for (ModelFamily f : {ModelFamily::ea, ModelFamily::rfim, ModelFamily::mixed_pspin,
                        ModelFamily::vector_sk, ModelFamily::diluted})
    if (to_string(f) == name) return f;
  s.fail(path, "unknown model family '" + name + "'");
}

ModelParams parse_model(const Schema& s, const json& m, const std::string& path,
                        const std::filesystem::path& base_dir) {
  if (!m.is_object()) s.fail(path, "expected an object");
  s.allow_keys(m, path,
               {"family", "lattice", "periodic", "complete", "graph_file", "chaos", "beta", "h",
                "bond_sign", "n", "betas", "p", "lambda", "points", "nu"});
  if (!m.contains("family")) s.fail(Schema::join(path, "family"), "missing required key");
  ModelParams model;
  model.family = parse_family(s, m["family"], Schema::join(path, "family"));

  auto key = [&](const char* k) { return Schema::join(path, k); };
  if (m.contains("lattice")) {
    const json& dims = m["lattice"];
    if (!dims.is_array() || dims.empty()) s.fail(key("lattice"), "expected a list of side lengths");
    for (std::size_t i = 0; i < dims.size(); ++i)
      model.lattice.push_back(s.count(dims[i], key("lattice") + "[" + std::to_string(i) + "]"));
  }
  if (m.contains("periodic")) model.periodic = s.boolean(m["periodic"], key("periodic"));
  if (m.contains("complete")) model.complete = s.count(m["complete"], key("complete"));
  if (m.contains("graph_file")) {
    std::filesystem::path file = s.string(m["graph_file"], key("graph_file"));
    if (file.is_relative()) file = base_dir / file;
    std::ifstream in(file);
    if (!in) s.fail(key("graph_file"), "cannot open " + file.string());
    try {
      model.graph = read_graph(in);
    } catch (const std::exception& e) {
      s.fail(key("graph_file"), e.what());
    }
  }
  if (m.contains("chaos")) {
    const std::string c = s.string(m["chaos"], key("chaos"));
    if (c == "bonds") model.chaos = ChaosTerm::bonds;
    else if (c == "field") model.chaos = ChaosTerm::field;
    else s.fail(key("chaos"), "expected \"bonds\" or \"field\"");
  }
  if (m.contains("beta")) model.beta = s.number(m["beta"], key("beta"));
  if (m.contains("h")) model.h = s.number(m["h"], key("h"));
  if (m.contains("bond_sign")) model.bond_sign = s.number(m["bond_sign"], key("bond_sign"));
  if (m.contains("n")) model.n = s.count(m["n"], key("n"));
  if (m.contains("p")) model.p = static_cast<int>(s.count(m["p"], key("p")));
  if (m.contains("lambda")) model.lambda = s.positive(m["lambda"], key("lambda"));
  if (m.contains("betas")) {
    const json& b = m["betas"];
    if (!b.is_object()) s.fail(key("betas"), "expected an object mapping p to beta_p");
    for (const auto& [p, beta] : b.items()) {
      int order = 0;
      const auto res = std::from_chars(p.data(), p.data() + p.size(), order);
      if (res.ec != std::errc() || res.ptr != p.data() + p.size() || order < 1)
        s.fail(key("betas") + "." + p, "keys must be positive integers");
      model.betas[order] = s.number(beta, key("betas") + "." + p);
    }
  }
  if (m.contains("points")) {
    const json& pts = m["points"];
    if (!pts.is_array() || pts.empty()) s.fail(key("points"), "expected a list of points");
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::string at = key("points") + "[" + std::to_string(i) + "]";
      if (!pts[i].is_array()) s.fail(at, "expected a coordinate list");
      std::vector<double> point;
      for (std::size_t j = 0; j < pts[i].size(); ++j)
        point.push_back(s.number(pts[i][j], at + "[" + std::to_string(j) + "]"));
      model.points.push_back(std::move(point));
    }
  }
  if (m.contains("nu")) model.nu = s.number_grid(m["nu"], key("nu"));
  return model;
}

EngineChoice parse_engine(const Schema& s, const json& e, const std::string& path) {
  if (e.is_string()) {
    const std::string kind = e.get<std::string>();
    if (kind == "exact") return EngineChoice::exact();
    if (kind == "mcmc") return EngineChoice::metropolis({});
    s.fail(path, "expected \"exact\" or \"mcmc\"");
  }
  if (!e.is_object()) s.fail(path, "expected a string or an object");
  s.allow_keys(e, path, {"kind", "sweeps", "burn_in", "thin", "chains", "stderr_cap"});
  if (!e.contains("kind")) s.fail(Schema::join(path, "kind"), "missing required key");
  const std::string kind = s.string(e["kind"], Schema::join(path, "kind"));
  if (kind == "exact") {
    if (e.size() > 1) s.fail(path, "the exact engine takes no options");
    return EngineChoice::exact();
  }
  if (kind != "mcmc") s.fail(Schema::join(path, "kind"), "expected \"exact\" or \"mcmc\"");
  McmcConfig cfg;
  if (e.contains("sweeps")) cfg.sweeps = s.count(e["sweeps"], Schema::join(path, "sweeps"));
  if (e.contains("burn_in")) cfg.burn_in = s.count(e["burn_in"], Schema::join(path, "burn_in"), 0);
  if (e.contains("thin")) cfg.thin = s.count(e["thin"], Schema::join(path, "thin"));
  if (e.contains("chains")) cfg.chains = s.count(e["chains"], Schema::join(path, "chains"));
  if (e.contains("stderr_cap"))
    cfg.stderr_cap = s.positive(e["stderr_cap"], Schema::join(path, "stderr_cap"));
  try {
    cfg.validate();
  } catch (const std::exception& ex) {
    s.fail(path, ex.what());
  }
  return EngineChoice::metropolis(cfg);
}

WeightSpec parse_weights(const Schema& s, const json& w, const std::string& path) {
  WeightSpec spec;
  auto kind_of = [&](const std::string& name, const std::string& at) {
    if (name == "uniform") return WeightKind::uniform;
    if (name == "ones") return WeightKind::ones;
    if (name == "random_signed") return WeightKind::random_signed;
    s.fail(at, "expected \"uniform\", \"ones\" or \"random_signed\"");
  };
  if (w.is_string()) {
    spec.kind = kind_of(w.get<std::string>(), path);
  } else if (w.is_array()) {
    spec.kind = WeightKind::explicit_values;
    spec.values = s.number_grid(w, path);
  } else if (w.is_object()) {
    s.allow_keys(w, path, {"kind", "seed"});
    if (!w.contains("kind")) s.fail(Schema::join(path, "kind"), "missing required key");
    spec.kind = kind_of(s.string(w["kind"], Schema::join(path, "kind")), Schema::join(path, "kind"));
    if (w.contains("seed")) spec.seed = s.seed(w["seed"], Schema::join(path, "seed"));
  } else {
    s.fail(path, "expected a weight kind, a list of values or an object");
  }
  return spec;
}

bool uses_k(TheoremId id) {
  return id == TheoremId::thm5_3_ineq1 || id == TheoremId::thm5_3_ineq2;
}

Experiment parse_experiment(const Schema& s, const json& x, const std::string& path,
                            std::size_t index, const std::filesystem::path& base_dir) {
  if (!x.is_object()) s.fail(path, "expected an object");
  s.allow_keys(x, path,
               {"name", "theorem", "model", "models", "t", "gamma", "gammas", "k", "weights",
                "c_k", "engine", "n_disorder", "seed", "lambda_n", "ck_grid_halfwidth"});
  auto key = [&](const char* k) { return Schema::join(path, k); };
  Experiment ex;
  ex.name = x.contains("name") ? s.string(x["name"], key("name"))
                               : "experiment" + std::to_string(index);
  if (ex.name.empty() || ex.name.find_first_of("/\\ \t\n") != std::string::npos)
    s.fail(key("name"), "must be non-empty and free of whitespace and path separators");

  if (!x.contains("theorem")) s.fail(key("theorem"), "missing required key");
  const std::string theorem = s.string(x["theorem"], key("theorem"));
  const auto id = parse_theorem(theorem);
  if (!id) s.fail(key("theorem"), "unknown theorem id '" + theorem + "'");
  ex.theorem = *id;

  if (x.contains("model") && x.contains("models"))
    s.fail(key("models"), "give either 'model' or 'models', not both");
  if (x.contains("model")) {
    ex.models.push_back(parse_model(s, x["model"], key("model"), base_dir));
  } else if (x.contains("models")) {
    const json& ms = x["models"];
    if (!ms.is_array() || ms.empty()) s.fail(key("models"), "expected a non-empty list");
    for (std::size_t i = 0; i < ms.size(); ++i)
      ex.models.push_back(
          parse_model(s, ms[i], key("models") + "[" + std::to_string(i) + "]", base_dir));
  } else if (ex.theorem != TheoremId::diluted_tail) {
    s.fail(key("model"), "missing required key");
  }

  if (x.contains("t")) ex.t_grid = s.number_grid(x["t"], key("t"));
  if (x.contains("gamma") && x.contains("gammas"))
    s.fail(key("gammas"), "give either 'gamma' or 'gammas', not both");
  if (x.contains("gamma")) {
    ex.gammas.clear();
    for (double g : s.number_grid(x["gamma"], key("gamma"))) ex.gammas.emplace_back(g, g);
  }
  if (x.contains("gammas")) {
    const json& gs = x["gammas"];
    if (!gs.is_array() || gs.empty()) s.fail(key("gammas"), "expected a non-empty list of pairs");
    ex.gammas.clear();
    for (std::size_t i = 0; i < gs.size(); ++i) {
      const std::string at = key("gammas") + "[" + std::to_string(i) + "]";
      if (!gs[i].is_array() || gs[i].size() != 2) s.fail(at, "expected a pair [gamma1, gamma2]");
      ex.gammas.emplace_back(s.positive(gs[i][0], at + "[0]"), s.positive(gs[i][1], at + "[1]"));
    }
  }
  if (x.contains("k")) {
    ex.k_grid.clear();
    for (double k : s.number_grid(x["k"], key("k"))) {
      if (k != std::floor(k) || k < 0 || k > 8) s.fail(key("k"), "k must be an integer in [0, 8]");
      ex.k_grid.push_back(static_cast<int>(k));
    }
  }
  if (x.contains("weights")) ex.weights = parse_weights(s, x["weights"], key("weights"));
  if (x.contains("c_k")) ex.c_k = s.positive(x["c_k"], key("c_k"));
  if (x.contains("engine")) ex.engine = parse_engine(s, x["engine"], key("engine"));
  if (x.contains("n_disorder")) ex.n_disorder = s.count(x["n_disorder"], key("n_disorder"), 2);
  if (x.contains("seed")) ex.seed = s.seed(x["seed"], key("seed"));
  if (x.contains("lambda_n")) ex.lambda_n = s.number_grid(x["lambda_n"], key("lambda_n"));
  if (x.contains("ck_grid_halfwidth"))
    ex.ck_grid_halfwidth = s.positive(x["ck_grid_halfwidth"], key("ck_grid_halfwidth"));
  return ex;
}

// ---- output helpers ----

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << v;
  return out.str();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", 0, "cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct PlotSeries {
  std::string label;
  std::vector<std::tuple<double, double, double>> rows;  // x, lhs, rhs
};

void write_plot_files(const std::filesystem::path& dir, const Experiment& ex,
                      const std::vector<PlotSeries>& series) {
  const char* x_name = ex.theorem == TheoremId::diluted_tail ? "lambda_n" : "t";
  for (const char* column : {"lhs", "rhs"}) {
    std::ofstream out(dir / (ex.name + "." + column + ".dat"));
    out << "# " << to_string(ex.theorem) << " " << ex.name << ": " << x_name << " vs " << column
        << "\n";
    bool first = true;
    for (const PlotSeries& s : series) {
      if (!first) out << "\n\n";
      first = false;
      out << "# series " << s.label << "\n";
      for (const auto& [x, lhs, rhs] : s.rows)
        out << format_number(x) << " " << format_number(column[0] == 'l' ? lhs : rhs) << "\n";
    }
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

ConfigError::ConfigError(std::string key, std::size_t line, const std::string& what)
    : std::runtime_error("config error" + (line > 0 ? " at line " + std::to_string(line) : "") +
                         (key.empty() ? std::string() : " (key '" + key + "')") + ": " + what),
      key_(std::move(key)),
      line_(line) {}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1), e.what());
  }
  const Schema s(text);
  if (!root.is_object()) s.fail("", "top level must be an object");
  s.allow_keys(root, "", {"master_seed", "output_dir", "experiments"});
  RunConfig config;
  if (root.contains("master_seed")) config.master_seed = s.seed(root["master_seed"], "master_seed");
  if (root.contains("output_dir"))
    config.output_dir = s.string(root["output_dir"], "output_dir");
  if (root.contains("experiments")) {
    const json& xs = root["experiments"];
    if (!xs.is_array()) s.fail("experiments", "expected a list");
    std::set<std::string> names;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const std::string path = "experiments[" + std::to_string(i) + "]";
      Experiment ex = parse_experiment(s, xs[i], path, i, base_dir);
      if (!names.insert(ex.name).second)
        s.fail(path + ".name", "duplicate experiment name '" + ex.name + "'");
      config.experiments.push_back(std::move(ex));
    }
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path), path.parent_path());
}

std::uint64_t experiment_seed(const RunConfig& config, std::size_t index) {
  const Experiment& ex = config.experiments.at(index);
  if (ex.seed) return *ex.seed;
  return splitmix64(config.master_seed + splitmix64(index + 1));
}

namespace {

std::vector<ExperimentPoint> expand(const Experiment& ex) {
  std::vector<ExperimentPoint> points;
  if (ex.theorem == TheoremId::diluted_tail) {
    for (double m : ex.lambda_n) {
      ExperimentPoint p;
      p.theorem = ex.theorem;
      p.model.family = ModelFamily::diluted;
      p.model.n = 1;
      p.model.lambda = m;
      points.push_back(p);
    }
    return points;
  }
  const std::vector<int> ks = uses_k(ex.theorem) ? ex.k_grid : std::vector<int>{1};
  for (const ModelParams& model : ex.models)
    for (const auto& [g1, g2] : ex.gammas)
      for (int k : ks)
        for (double t : ex.t_grid) {
          ExperimentPoint p;
          p.theorem = ex.theorem;
          p.model = model;
          p.gamma1 = g1;
          p.gamma2 = g2;
          p.t = t;
          p.k = k;
          p.weights = ex.weights;
          p.c_k = ex.c_k;
          p.ck_grid_halfwidth = ex.ck_grid_halfwidth;
          points.push_back(p);
        }
  return points;
}

std::uint64_t point_seed(std::uint64_t experiment, std::size_t index) {
  return splitmix64(experiment ^ splitmix64(0x9e3779b97f4a7c15ULL + index));
}

}  // namespace

std::vector<BoundReport> run_experiment(const Experiment& experiment, std::uint64_t seed) {
  std::vector<BoundReport> out;
  const auto points = expand(experiment);
  for (std::size_t i = 0; i < points.size(); ++i) {
    ExperimentPoint p = points[i];
    if (p.weights.kind == WeightKind::random_signed && p.weights.seed == 0) p.weights.seed = seed;
    out.push_back(run_theorem(p, experiment.engine, experiment.n_disorder, point_seed(seed, i)));
  }
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_row(const BoundReport& r) {
  std::string row;
  auto cell = [&](std::string_view v) {
    if (!row.empty()) row += ',';
    row += v;
  };
  cell(to_string(r.theorem));
  cell(r.family);
  cell(std::to_string(r.e_size));
  cell(std::to_string(r.v_size));
  cell(format_number(r.t));
  cell(format_number(r.gamma1));
  cell(format_number(r.gamma2));
  cell(std::to_string(r.k));
  cell(std::to_string(r.n_disorder));
  cell(to_string(r.engine));
  cell(format_number(r.lhs.value));
  cell(format_number(r.lhs.stderr));
  cell(format_number(r.rhs));
  cell(format_number(r.slack));
  cell(to_string(r.verdict));
  return row;
}

void request_interrupt() noexcept { g_interrupted = true; }
void clear_interrupt() noexcept { g_interrupted = false; }

int run(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
        std::optional<std::uint64_t> seed_override, std::ostream& log) {
  const auto started = std::chrono::steady_clock::now();
  RunConfig config;
  std::string text;
  try {
    text = read_file(config_path);
    config = parse_config(text, config_path.parent_path());
  } catch (const std::exception& e) {
    log << e.what() << "\n";
    return kExitError;
  }
  if (seed_override) config.master_seed = *seed_override;
  const std::filesystem::path dir = out_dir.empty() ? config.output_dir : out_dir;
  if (dir.empty()) {
    log << "no output directory: pass --out or set output_dir in the config\n";
    return kExitError;
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::ofstream csv(dir / "results.csv", std::ios::binary | std::ios::trunc);
  if (!csv) {
    log << "cannot write " << (dir / "results.csv").string() << "\n";
    return kExitError;
  }
  csv << kCsvHeader << "\n" << std::flush;

  json manifest;
  manifest["tool_version"] = std::string(kToolVersion);
  manifest["config"] = config_path.string();
  manifest["config_hash"] = "fnv1a64:" + hex64(fnv1a(text));
  manifest["master_seed"] = config.master_seed;
  manifest["seed_override"] = seed_override ? json(*seed_override) : json(nullptr);
  manifest["experiments"] = json::array();

  bool violation = false, hypothesis = false, error = false, interrupted = false;
  std::size_t total_rows = 0;
  for (std::size_t xi = 0; xi < config.experiments.size() && !interrupted; ++xi) {
    const Experiment& ex = config.experiments[xi];
    const std::uint64_t seed = experiment_seed(config, xi);
    const auto points = expand(ex);
    json entry{{"name", ex.name}, {"theorem", std::string(to_string(ex.theorem))},
               {"seed", seed}, {"points", points.size()}};
    std::map<std::string, PlotSeries> series;
    std::vector<std::string> series_order;
    std::size_t rows = 0;
    json notes = json::array();
    const auto ex_started = std::chrono::steady_clock::now();
    try {
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (g_interrupted) {
          interrupted = true;
          break;
        }
        ExperimentPoint p = points[i];
        if (p.weights.kind == WeightKind::random_signed && p.weights.seed == 0)
          p.weights.seed = seed;
        const BoundReport r = run_theorem(p, ex.engine, ex.n_disorder, point_seed(seed, i));
        csv << csv_row(r) << "\n" << std::flush;
        ++rows;
        violation |= r.verdict == Verdict::fail;
        hypothesis |= r.verdict == Verdict::hypothesis_failed;
        if (!r.note.empty())
          notes.push_back({{"row", total_rows + rows}, {"note", r.note}});
        if (r.verdict == Verdict::fail || r.verdict == Verdict::hypothesis_failed)
          log << ex.name << ": " << to_string(r.verdict) << ": " << csv_row(r) << "\n";

        std::ostringstream label;
        label << r.family << " E=" << r.e_size << " V=" << r.v_size
              << " gamma1=" << format_number(r.gamma1) << " gamma2=" << format_number(r.gamma2)
              << " k=" << r.k;
        const double x = ex.theorem == TheoremId::diluted_tail ? p.model.lambda : r.t;
        auto [it, fresh] = series.try_emplace(label.str());
        if (fresh) {
          it->second.label = label.str();
          series_order.push_back(label.str());
        }
        it->second.rows.emplace_back(x, r.lhs.value, r.rhs);
      }
    } catch (const std::exception& e) {
      error = true;
      log << ex.name << ": error: " << e.what() << "\n";
      entry["error"] = e.what();
    }
    std::vector<PlotSeries> ordered;
    for (const auto& label : series_order) ordered.push_back(series[label]);
    write_plot_files(dir, ex, ordered);
    total_rows += rows;
    entry["rows"] = rows;
    if (!notes.empty()) entry["notes"] = notes;
    entry["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - ex_started).count();
    manifest["experiments"].push_back(entry);
    log << ex.name << ": " << rows << "/" << points.size() << " rows\n";
  }
  interrupted |= g_interrupted.load();

  int code = kExitOk;
  if (interrupted) code = kExitInterrupted;
  else if (violation) code = kExitViolation;
  else if (error) code = kExitError;
  else if (hypothesis) code = kExitHypothesisFailed;

  manifest["rows"] = total_rows;
  manifest["interrupted"] = interrupted;
  manifest["exit_code"] = code;
  manifest["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";
  return code;
}

// ------------------------------------------------------------- reporting

double fit_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_log_slope: need at least two (x, y) pairs");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw std::invalid_argument("fit_log_slope: values must be positive");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= double(x.size());
  my /= double(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_log_slope: x values must not all coincide");
  return sxy / sxx;
}

ReportSummary summarize_results(std::istream& csv) {
  std::string line;
  if (!std::getline(csv, line) || line != kCsvHeader)
    throw std::runtime_error("schema mismatch: header must be exactly \"" +
                             std::string(kCsvHeader) + "\"");
  ReportSummary summary;
  std::map<std::string, double> min_slack;
  std::vector<std::string> failures;
  // (theorem, family, t, gamma1, gamma2, k) -> (|E|, lhs, rhs) for scaling fits.
  std::map<std::string, std::vector<std::tuple<double, double, double>>> groups;
  std::size_t line_no = 1;
  while (std::getline(csv, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 15)
      throw std::runtime_error("schema mismatch at line " + std::to_string(line_no) +
                               ": expected 15 fields, got " + std::to_string(f.size()));
    double e_size = 0, lhs = 0, rhs = 0, slack = 0;
    try {
      e_size = std::stod(f[2]);
      lhs = std::stod(f[10]);
      rhs = std::stod(f[12]);
      slack = std::stod(f[13]);
    } catch (const std::exception&) {
      throw std::runtime_error("schema mismatch at line " + std::to_string(line_no) +
                               ": non-numeric field");
    }
    const std::string& verdict = f[14];
    if (verdict != "pass" && verdict != "fail" && verdict != "hypothesis_failed" &&
        verdict != "reference")
      throw std::runtime_error("schema mismatch at line " + std::to_string(line_no) +
                               ": unknown verdict '" + verdict + "'");
    ++summary.rows;
    if (verdict == "fail") {
      ++summary.violations;
      failures.push_back(line);
    } else if (verdict == "hypothesis_failed") {
      ++summary.hypothesis_failures;
      failures.push_back(line);
    }
    if (verdict != "reference") {
      auto [it, fresh] = min_slack.try_emplace(f[0], slack);
      if (!fresh) it->second = std::min(it->second, slack);
    }
    groups[f[0] + " family=" + f[1] + " t=" + f[4] + " gamma1=" + f[5] + " gamma2=" + f[6] +
           " k=" + f[7]]
        .emplace_back(e_size, lhs, rhs);
  }

  std::ostringstream out;
  out << summary.rows << " rows, " << summary.violations << " violations, "
      << summary.hypothesis_failures << " hypothesis failures\n";
  if (!min_slack.empty()) {
    out << "min slack per theorem:\n";
    for (const auto& [theorem, slack] : min_slack)
      out << "  " << theorem << " " << format_number(slack) << "\n";
  }
  for (const auto& row : failures) out << "FAILED ROW: " << row << "\n";

  bool header = false;
  for (auto& [label, points] : groups) {
    std::sort(points.begin(), points.end());
    std::vector<double> e, lhs, rhs;
    for (const auto& [x, l, r] : points) {
      if (!e.empty() && e.back() == x) continue;
      e.push_back(x);
      lhs.push_back(l);
      rhs.push_back(r);
    }
    if (e.size() < 2 || e.front() <= 0.0) continue;
    if (!header) {
      out << "log-log slope in |E|:\n";
      header = true;
    }
    out << "  " << label << ": rhs ";
    try {
      out << format_number(fit_log_slope(e, rhs));
    } catch (const std::exception&) {
      out << "n/a";
    }
    out << ", lhs ";
    try {
      out << format_number(fit_log_slope(e, lhs));
    } catch (const std::exception&) {
      out << "n/a";
    }
    out << "\n";
  }
  summary.text = out.str();
  return summary;
}

int sweep_report(const std::filesystem::path& results_csv, std::ostream& out) {
  std::ifstream in(results_csv);
  if (!in) {
    out << "cannot open " << results_csv.string() << "\n";
    return kExitError;
  }
  ReportSummary summary;
  try {
    summary = summarize_results(in);
  } catch (const std::exception& e) {
    out << e.what() << "\n";
    return kExitError;
  }
  out << summary.text;
  if (summary.violations > 0) return kExitViolation;
  if (summary.hypothesis_failures > 0) return kExitHypothesisFailed;
  return kExitOk;
}

}  // namespace chaoslab
