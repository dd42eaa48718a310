#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "clusterkit/calibration.hpp"
#include "clusterkit/cancellation.hpp"
#include "clusterkit/closures.hpp"
#include "clusterkit/errors.hpp"
#include "clusterkit/expansion.hpp"
#include "clusterkit/graphs.hpp"
#include "clusterkit/hashing.hpp"
#include "clusterkit/oz.hpp"
#include "clusterkit/parallel.hpp"
#include "clusterkit/potentials.hpp"
#include "clusterkit/version.hpp"

namespace clusterkit::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using Config = std::map<std::string, std::string>;

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ------------------------------------------------------------ config schema

enum class KeyType { Int, Real, Text, Bool };

struct KeySpec {
  KeyType type;
  const char* fallback;
};

const std::map<std::string, KeySpec>& schema() {
  static const std::map<std::string, KeySpec> s{
      {"run.seed", {KeyType::Int, "20240611"}},
      {"run.threads", {KeyType::Int, "0"}},
      {"mc.samples", {KeyType::Int, "100000"}},
      {"mc.strata", {KeyType::Int, "64"}},
      {"mc.proposal", {KeyType::Text, "core_ball"}},
      {"mc.stratify_by_vertex", {KeyType::Bool, "false"}},
      {"mc.force_monte_carlo", {KeyType::Bool, "false"}},
      {"py.dr", {KeyType::Real, "0.01"}},
      {"py.points", {KeyType::Int, "1024"}},
      {"py.mixing", {KeyType::Real, "0.5"}},
      {"py.tol", {KeyType::Real, "1e-10"}},
      {"py.max_iter", {KeyType::Int, "10000"}},
      {"graphs.max_vertices", {KeyType::Int, "9"}},
      {"oz.n_sigma", {KeyType::Real, "4"}},
      {"oz.quad_tol", {KeyType::Real, "1e-9"}},
  };
  return s;
}

bool is_potential_key(const std::string& key) { return key.rfind("potential.", 0) == 0; }

// Canonical text for a config value so equal settings hash equally.
std::string normalize(const std::string& key, const std::string& value) {
  if (is_potential_key(key)) return value;
  const auto it = schema().find(key);
  if (it == schema().end()) throw ConfigError("unknown config key '" + key + "'");
  try {
    std::size_t used = 0;
    switch (it->second.type) {
      case KeyType::Int: {
        if (!value.empty() && value[0] == '-') {
          const long long v = std::stoll(value, &used);
          if (used != value.size()) break;
          return std::to_string(v);
        }
        const unsigned long long v = std::stoull(value, &used);
        if (used != value.size()) break;
        return std::to_string(v);
      }
      case KeyType::Real: {
        const double v = std::stod(value, &used);
        if (used != value.size() || !std::isfinite(v)) break;
        return num(v);
      }
      case KeyType::Bool:
        if (value == "true" || value == "1" || value == "yes" || value == "on") return "true";
        if (value == "false" || value == "0" || value == "no" || value == "off") return "false";
        break;
      case KeyType::Text:
        return value;
    }
  } catch (const std::exception&) {
  }
  throw ConfigError("bad value '" + value + "' for config key '" + key + "'");
}

void set_key(Config& cfg, const std::string& key, const std::string& value) {
  cfg[key] = normalize(key, value);
}

void read_config_file(const std::string& path, Config& cfg) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path);
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("cannot parse config file: ") + e.what());
  }
  const fs::path base = fs::absolute(path).parent_path();
  for (const auto& [section, node] : tree) {
    if (node.empty()) throw ConfigError("config key '" + section + "' must sit in a section");
    if (section == "potential") {
      Config pot;
      for (const auto& [k, v] : node) pot[k] = v.data();
      // A potential section replaces the whole potential, not single keys.
      for (auto it = cfg.begin(); it != cfg.end();)
        it = is_potential_key(it->first) ? cfg.erase(it) : std::next(it);
      for (auto [k, v] : pot) {
        if (k == "table_path" && fs::path(v).is_relative()) v = (base / v).string();
        cfg["potential." + k] = v;
      }
      continue;
    }
    for (const auto& [k, v] : node) set_key(cfg, section + "." + k, v.data());
  }
}

// ------------------------------------------------------------ global flags

// Flags that feed the config rather than the command. They are stripped from
// the recorded command line; their effect is kept in the config snapshot.
struct GlobalFlag {
  std::string key;  // config key, or a special marker
  bool takes_value;
};

const std::map<std::string, GlobalFlag>& global_flags() {
  static const std::map<std::string, GlobalFlag> g{
      {"--config", {"@config", true}},
      {"--out", {"@out", true}},
      {"--potential", {"@potential", true}},
      {"--seed", {"run.seed", true}},
      {"--threads", {"run.threads", true}},
      {"--samples", {"mc.samples", true}},
      {"--strata", {"mc.strata", true}},
      {"--proposal", {"mc.proposal", true}},
      {"--stratify-by-vertex", {"mc.stratify_by_vertex", false}},
      {"--force-mc", {"mc.force_monte_carlo", false}},
      {"--dr", {"py.dr", true}},
      {"--points", {"py.points", true}},
      {"--mixing", {"py.mixing", true}},
      {"--tol", {"py.tol", true}},
      {"--max-iter", {"py.max_iter", true}},
      {"--max-graph-vertices", {"graphs.max_vertices", true}},
      {"--n-sigma", {"oz.n_sigma", true}},
      {"--kind", {"potential.kind", true}},
      {"--sigma", {"potential.sigma", true}},
      {"--beta", {"potential.beta", true}},
      {"--epsilon", {"potential.epsilon", true}},
      {"--lambda", {"potential.lambda", true}},
      {"--stability-B", {"potential.stability_B", true}},
      {"--dimension", {"potential.d", true}},
  };
  return g;
}

const char* kGlobalHelp = R"(Global options (accepted anywhere on the line):
  --config FILE        INI config with sections [run] [mc] [potential] [py] [graphs] [oz]
  --out DIR            write data files and manifest.json into DIR
  --seed S             master seed (fallback: config file, then CLUSTERKIT_SEED)
  --threads N          worker count, 0 = available parallelism
  --samples M          Monte Carlo samples per graph class
  --strata N           Monte Carlo strata
  --proposal P         core_ball | gaussian
  --stratify-by-vertex --force-mc
  --potential FILE     potential file; --kind --sigma --beta --epsilon --lambda
                       --stability-B --dimension override single keys
  --dr --points                   PY grid
  --mixing --tol --max-iter       PY iteration controls
  --max-graph-vertices N          enumeration cap
  --n-sigma X                     acceptance width in standard errors
Exit codes: 0 pass, 1 verification failure, 2 usage/config, 3 numerical.
)";

struct Extracted {
  std::vector<std::string> command;
  std::vector<std::pair<std::string, std::string>> flags;  // (key, value) in order
};

Extracted extract_globals(const std::vector<std::string>& args) {
  Extracted ex;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& tok = args[i];
    if (tok.rfind("--", 0) != 0) {
      ex.command.push_back(tok);
      continue;
    }
    const auto eq = tok.find('=');
    const std::string name = tok.substr(0, eq);
    const auto it = global_flags().find(name);
    if (it == global_flags().end()) {
      ex.command.push_back(tok);
      continue;
    }
    std::string value = "true";
    if (it->second.takes_value) {
      if (eq != std::string::npos) {
        value = tok.substr(eq + 1);
      } else {
        if (i + 1 >= args.size()) throw CLI::ArgumentMismatch(name + " needs a value");
        value = args[++i];
      }
    } else if (eq != std::string::npos) {
      value = tok.substr(eq + 1);
    }
    ex.flags.emplace_back(it->second.key, value);
  }
  return ex;
}

// ------------------------------------------------------------ run context

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Context {
  Config config;
  std::vector<std::string> command;
  std::optional<std::string> out_dir;
  std::string hash;
  std::vector<std::pair<std::string, std::string>> files;
  json records = json::array();
  std::ostream* out = nullptr;

  std::uint64_t seed() const { return std::stoull(config.at("run.seed")); }
  int threads() const { return resolve_threads(std::stoi(config.at("run.threads"))); }
  double real(const std::string& k) const { return std::stod(config.at(k)); }
  long long integer(const std::string& k) const { return std::stoll(config.at(k)); }

  PairPotential potential() const {
    std::map<std::string, std::string> keys;
    for (const auto& [k, v] : config)
      if (is_potential_key(k)) keys[k.substr(10)] = v;
    return potential_from_keys(keys);
  }

  McConfig mc() const {
    McConfig m;
    m.seed = seed();
    m.n_samples = static_cast<std::uint64_t>(integer("mc.samples"));
    m.strata = static_cast<int>(integer("mc.strata"));
    m.proposal = proposal_from_string(config.at("mc.proposal"));
    m.stratify_by_vertex = config.at("mc.stratify_by_vertex") == "true";
    m.force_monte_carlo = config.at("mc.force_monte_carlo") == "true";
    m.threads = threads();
    return m;
  }

  EnumerationOptions enum_opts() const {
    EnumerationOptions e;
    e.max_vertices = static_cast<int>(integer("graphs.max_vertices"));
    e.threads = threads();
    return e;
  }

  PyOptions py_options() const {
    PyOptions o;
    o.mixing = real("py.mixing");
    o.tol = real("py.tol");
    o.max_iter = static_cast<int>(integer("py.max_iter"));
    return o;
  }

  GridSpec grid() const {
    return GridSpec{real("py.dr"), static_cast<std::size_t>(integer("py.points"))};
  }

  void compute_hash() {
    Fnv1a h;
    h.text(kVersion).text("\x1e");
    for (const auto& tok : command) h.text(tok).text("\x1f");
    h.text("\x1e");
    for (const auto& [k, v] : config) {
      if (k == "run.threads") continue;
      h.text(k).text("=").text(v).text("\x1f");
    }
    hash = hex64(h.digest());
  }

  void csv(const std::string& name, const std::string& body) {
    files.emplace_back(name, "# manifest: " + hash + "\n" + body);
  }
  void raw(const std::string& name, const std::string& body) { files.emplace_back(name, body); }
  void json_file(const std::string& name, json j) {
    j["manifest"] = hash;
    files.emplace_back(name, j.dump(2) + "\n");
  }
  void record(json r) { records.push_back(std::move(r)); }

  json manifest() const {
    json m;
    m["tool"] = "clusterkit";
    m["version"] = kVersion;
    m["hash"] = hash;
    m["created"] = utc_now();
    m["command"] = command;
    m["seed"] = seed();
    m["threads"] = threads();
    m["config"] = config;
    json names = json::array();
    for (const auto& f : files) names.push_back(f.first);
    m["outputs"] = names;
    m["records"] = records;
    return m;
  }

  /// Writes every file plus manifest.json when --out was given; otherwise
  /// prints the primary output.
  void flush(const std::string& primary) {
    if (!out_dir) {
      *out << primary;
      return;
    }
    fs::create_directories(*out_dir);
    for (const auto& [name, body] : files) {
      std::ofstream f(fs::path(*out_dir) / name, std::ios::binary);
      if (!f) throw ConfigError("cannot write " + (fs::path(*out_dir) / name).string());
      f << body;
    }
    std::ofstream m(fs::path(*out_dir) / "manifest.json", std::ios::binary);
    m << manifest().dump(2) << "\n";
    *out << primary;
  }
};

// Builds the effective config from defaults, CLUSTERKIT_SEED, --config and
// flags, in increasing precedence.
Config layered_config(const std::vector<std::pair<std::string, std::string>>& flags,
                      const std::string& default_kind) {
  Config cfg;
  for (const auto& [k, def] : schema()) cfg[k] = def.fallback;
  if (const char* env = std::getenv("CLUSTERKIT_SEED"); env && *env) set_key(cfg, "run.seed", env);
  for (const auto& [k, v] : flags)
    if (k == "@config") read_config_file(v, cfg);
  std::optional<std::string> pot_file;
  std::map<std::string, std::string> pot_flags;
  for (const auto& [k, v] : flags) {
    if (k == "@potential") {
      pot_file = v;
    } else if (is_potential_key(k)) {
      pot_flags[k] = v;
    } else if (k[0] != '@') {
      set_key(cfg, k, v);
    }
  }
  auto clear_potential = [&] {
    for (auto it = cfg.begin(); it != cfg.end();)
      it = is_potential_key(it->first) ? cfg.erase(it) : std::next(it);
  };
  if (pot_file) {
    const PairPotential p = load_potential(*pot_file);
    clear_potential();
    for (const auto& [k, v] : potential_keys(p)) cfg["potential." + k] = v;
  }
  if (auto it = pot_flags.find("potential.kind"); it != pot_flags.end()) {
    const auto current = cfg.find("potential.kind");
    if (current == cfg.end() || potential_kind_from_string(current->second) !=
                                    potential_kind_from_string(it->second))
      clear_potential();
  }
  for (const auto& [k, v] : pot_flags) cfg[k] = v;
  if (!cfg.count("potential.kind")) cfg["potential.kind"] = default_kind;
  return cfg;
}

// Replaces the potential keys by their canonical form (tables inlined).
void canonicalize_potential(Config& cfg) {
  std::map<std::string, std::string> keys;
  for (const auto& [k, v] : cfg)
    if (is_potential_key(k)) keys[k.substr(10)] = v;
  const PairPotential p = potential_from_keys(keys);
  for (auto it = cfg.begin(); it != cfg.end();)
    it = is_potential_key(it->first) ? cfg.erase(it) : std::next(it);
  for (const auto& [k, v] : potential_keys(p)) cfg["potential." + k] = v;
}

// ------------------------------------------------------------ helpers

json checks_report(const std::string& name, const json& checks, json extra = json::object()) {
  bool pass = true;
  for (const auto& c : checks) pass = pass && c.at("pass").get<bool>();
  json r = std::move(extra);
  r["report"] = name;
  r["checks"] = checks;
  r["pass"] = pass;
  if (!pass) {
    json failing = json::array();
    for (const auto& c : checks)
      if (!c.at("pass").get<bool>()) failing.push_back(c.at("name"));
    r["failing"] = failing;
  }
  return r;
}

int finish_report(Context& ctx, const std::string& file, const json& report) {
  json copy = report;
  copy["manifest"] = ctx.hash;
  ctx.json_file(file, report);
  ctx.flush(copy.dump(2) + "\n");
  return report.at("pass").get<bool>() ? kPass : kVerifyFailed;
}

std::vector<double> scaled(const std::vector<double>& xs, double s) {
  std::vector<double> out;
  for (double x : xs) out.push_back(x * s);
  return out;
}

std::vector<double> grid_radii(const std::vector<double>& range, double sigma) {
  if (range.size() != 2 || range[0] <= 0 || range[1] < 0)
    throw ConfigError("--grid expects STEP,RMAX with STEP > 0");
  std::vector<double> out;
  const long n = std::lround(range[1] / range[0]);
  for (long i = 0; i <= n; ++i) out.push_back(sigma * range[0] * static_cast<double>(i));
  return out;
}

std::string points_csv_row(std::initializer_list<double> xs) {
  std::string s;
  bool first = true;
  for (double x : xs) {
    if (!first) s += ',';
    s += num(x);
    first = false;
  }
  return s + "\n";
}

void read_radial_csv(const std::string& path, std::vector<double>& r, std::vector<double>& v) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string a, b;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',')) continue;
    try {
      std::size_t ua = 0, ub = 0;
      const double x = std::stod(a, &ua);
      const double y = std::stod(b, &ub);
      r.push_back(x);
      v.push_back(y);
    } catch (const std::exception&) {
      if (!r.empty()) throw ConfigError("malformed row in " + path + ": " + line);
    }
  }
}

// ------------------------------------------------------------ commands

struct Options {
  // graphs
  int white = 2, black = 0, census_max = 6, census_max_white = 3;
  std::string cls = "all";
  bool list = false;
  // coeff
  std::string target;
  int k = 0, m = 1;
  std::vector<double> radii, grid{0.1, 3.0};
  std::string normalization = "oz_consistent";
  // verify / identity
  std::vector<int> k_list{1, 2};
  int order = 3, max_vertices = 6, seeds = 200, K = 2;
  bool exact_1d = false;
  std::vector<double> rho_list{0.01, 0.02, 0.03, 0.04, 0.05};
  double rho_c = 0.05;
  double order_dr = 1e-3;
  int order_points = 12000;
  // oz / py
  std::string c_file;
  double rho = 0.1;
};

const std::vector<double>& default_oz_radii() {
  static const std::vector<double> r{0.0, 0.4, 0.8, 0.95, 1.05, 1.3, 1.6, 1.9, 2.3, 2.8};
  return r;
}

int cmd_graphs_count(Context& ctx, const Options& o) {
  const GraphClass cls = graph_class_from_string(o.cls);
  const auto eo = ctx.enum_opts();
  ctx.record({{"operation", "graphs.count"}, {"n_white", o.white}, {"n_black", o.black},
              {"class", to_string(cls)}});
  if (!o.list) {
    const std::size_t c = count(o.white, o.black, cls, eo);
    ctx.csv("count.csv", "n_white,n_black,class,count\n" + std::to_string(o.white) + "," +
                             std::to_string(o.black) + "," + to_string(cls) + "," +
                             std::to_string(c) + "\n");
    ctx.flush(std::to_string(c) + "\n");
    return kPass;
  }
  const auto gs = enumerate(o.white, o.black, cls, eo);
  json list = json::array();
  for (const auto& g : gs) {
    json edges = json::array();
    for (const auto& [a, b] : g.edges()) edges.push_back({a + 1, b + 1});
    list.push_back({{"n_white", g.n_white()}, {"n_black", g.n_black()}, {"edges", edges}});
  }
  json j{{"count", gs.size()}, {"class", to_string(cls)}, {"graphs", list}};
  ctx.json_file("graphs.json", j);
  j["manifest"] = ctx.hash;
  ctx.flush(j.dump(2) + "\n");
  return kPass;
}

int cmd_graphs_census(Context& ctx, const Options& o) {
  const auto eo = ctx.enum_opts();
  std::string body = "n_white,n_black,all,conn,two,af\n";
  for (int w = 1; w <= o.census_max_white; ++w)
    for (int b = 0; w + b <= o.census_max; ++b) {
      if (w + b < 2) continue;
      body += std::to_string(w) + "," + std::to_string(b);
      for (GraphClass c : {GraphClass::All, GraphClass::Connected, GraphClass::TwoConnected,
                           GraphClass::ArticulationFree})
        body += "," + std::to_string(count(w, b, c, eo));
      body += "\n";
    }
  ctx.record({{"operation", "graphs.census"}, {"max_vertices", o.census_max}});
  ctx.csv("census.csv", body);
  ctx.flush("# manifest: " + ctx.hash + "\n" + body);
  return kPass;
}

int cmd_coeff(Context& ctx, const Options& o) {
  const PairPotential p = ctx.potential();
  const McConfig mc = ctx.mc();
  const auto eo = ctx.enum_opts();
  const std::vector<double> radii =
      o.radii.empty() ? grid_radii(o.grid, p.sigma()) : scaled(o.radii, p.sigma());
  CoefficientTable t;
  if (o.target == "h2") {
    t = build_h_table(o.k, radii, p, mc, normalization_from_string(o.normalization), eo);
  } else if (o.target == "c2") {
    t = build_c2_table(o.k, radii, p, mc, eo);
  } else {
    t = build_virial_table(o.m, p, mc, eo);
  }
  ctx.record({{"operation", "coeff." + o.target}, {"provenance", t.provenance}});
  const std::string csv = t.to_csv();
  ctx.csv(o.target + ".csv", csv);
  ctx.json_file(o.target + ".json", json::parse(t.to_json()));
  ctx.flush("# manifest: " + ctx.hash + "\n" + csv);
  return kPass;
}

int cmd_oz_check(Context& ctx, const Options& o) {
  const PairPotential p = ctx.potential();
  const McConfig mc = ctx.mc();
  OzCheckOptions opts;
  opts.n_sigma = ctx.real("oz.n_sigma");
  opts.quad_tol = ctx.real("oz.quad_tol");
  opts.enum_opts = ctx.enum_opts();
  opts.normalization = normalization_from_string(o.normalization);
  const auto radii = scaled(o.radii.empty() ? default_oz_radii() : o.radii, p.sigma());
  json checks = json::array();
  json census = json::array();
  std::string csv = "k,r,h_k,c_k,convolution,residual,std_error,literal_residual\n";
  for (int k : o.k_list) {
    const OzOrderReport rep = oz_order_check(k, radii, p, mc, opts);
    for (const auto& a : rep.anchors) {
      checks.push_back({{"name", "oz k=" + std::to_string(k) + " r=" + num(a.r)},
                        {"k", k},
                        {"r", a.r},
                        {"h_k", a.h_k},
                        {"c_k", a.c_k},
                        {"convolution", a.convolution},
                        {"residual", a.residual},
                        {"std_error", a.std_error},
                        {"literal_residual", a.literal_residual},
                        {"pass", a.pass}});
      csv += std::to_string(k) + "," + points_csv_row({a.r, a.h_k, a.c_k, a.convolution,
                                                       a.residual, a.std_error,
                                                       a.literal_residual});
    }
    census.push_back({{"k", k},
                      {"articulation_free", rep.census.articulation_free},
                      {"two_connected", rep.census.two_connected},
                      {"nodal_split", rep.census.nodal_split},
                      {"nodal_split_without_label_factor",
                       rep.census.nodal_split_without_label_factor},
                      {"holds", rep.census.holds}});
    ctx.record({{"operation", "oz_order_check"}, {"k", k}, {"anchors", rep.anchors.size()}});
  }
  ctx.csv("oz_check.csv", csv);
  return finish_report(ctx, "oz_check.json",
                       checks_report("oz", checks,
                                     {{"normalization", o.normalization}, {"census", census}}));
}

int cmd_dissymmetry(Context& ctx, const Options& o) {
  const PairPotential p = ctx.potential();
  const auto res = dissymmetry_check(o.order, p, ctx.mc(), o.exact_1d, ctx.enum_opts());
  json checks = json::array();
  for (const auto& r : res) {
    json c{{"name", "dissymmetry order " + std::to_string(r.order)},
           {"order", r.order},
           {"residual", r.residual},
           {"std_error", r.std_error},
           {"pass", r.pass}};
    if (r.exact_residual) c["exact_residual"] = r.exact_residual->str();
    checks.push_back(c);
  }
  ctx.record({{"operation", "dissymmetry_check"}, {"order", o.order}, {"exact", o.exact_1d}});
  return finish_report(ctx, "dissymmetry.json",
                       checks_report("dissymmetry", checks, {{"exact", o.exact_1d}}));
}

int cmd_cancellation(Context& ctx, const Options& o) {
  auto eo = ctx.enum_opts();
  eo.max_vertices = std::max(eo.max_vertices, o.max_vertices);
  json checks = json::array();
  std::size_t total = 0;
  for (int w = 1; w <= o.max_vertices; ++w)
    for (int b = 0; w + b <= o.max_vertices; ++b) {
      if (w + b < 2) continue;
      const auto gs = enumerate(w, b, GraphClass::Connected, eo);
      std::vector<char> bad(gs.size(), 0);
      parallel_for(gs.size(), ctx.threads(), [&](std::size_t i) {
        const std::int64_t s = multiindex_cancellation_sum(gs[i]);
        const std::int64_t want = in_class(gs[i], GraphClass::ArticulationFree) ? 1 : 0;
        bad[i] = s != want;
      });
      const auto mismatches = std::count(bad.begin(), bad.end(), 1);
      total += gs.size();
      checks.push_back({{"name", "cancellation w=" + std::to_string(w) + " b=" +
                                     std::to_string(b)},
                        {"n_white", w},
                        {"n_black", b},
                        {"graphs", gs.size()},
                        {"mismatches", mismatches},
                        {"pass", mismatches == 0}});
    }
  ctx.record({{"operation", "multiindex_cancellation_sum"}, {"max_vertices", o.max_vertices},
              {"graphs", total}});
  return finish_report(ctx, "cancellation.json",
                       checks_report("cancellation", checks, {{"graphs", total}}));
}

int cmd_census_identity(Context& ctx, const Options& o) {
  json checks = json::array();
  for (int k : o.k_list) {
    const CensusIdentity c = oz_census_identity(k, ctx.enum_opts());
    checks.push_back({{"name", "oz census k=" + std::to_string(k)},
                      {"k", k},
                      {"articulation_free", c.articulation_free},
                      {"two_connected", c.two_connected},
                      {"nodal_split", c.nodal_split},
                      {"nodal_split_without_label_factor", c.nodal_split_without_label_factor},
                      {"holds_without_label_factor", c.holds_without_label_factor},
                      {"pass", c.holds}});
  }
  ctx.record({{"operation", "oz_census_identity"}, {"k", o.k_list}});
  return finish_report(ctx, "census_identity.json", checks_report("census", checks));
}

int cmd_py_order(Context& ctx, const Options& o) {
  const PairPotential p = ctx.potential();
  PyErrorOptions opts;
  opts.grid = GridSpec{o.order_dr * p.sigma(), static_cast<std::size_t>(o.order_points)};
  opts.solver = ctx.py_options();
  opts.solver.t_form_check = false;
  opts.anchor_radii = o.radii;
  opts.mc = ctx.mc();
  opts.enum_opts = ctx.enum_opts();
  opts.threads = ctx.threads();
  const PyErrorOrder res = py_error_order(p, o.rho_list, o.K, opts);
  std::string csv = "rho,error,noise_floor,worst_r\n";
  for (const auto& pt : res.points)
    csv += points_csv_row({pt.rho, pt.error, pt.noise_floor, pt.worst_r});
  ctx.csv("py_order.csv", csv);
  json checks = json::array();
  checks.push_back({{"name", "slope >= 1.8"},
                    {"slope", res.slope},
                    {"std_error", res.slope_std_error},
                    {"band", {res.band_lo, res.band_hi}},
                    {"pass", res.slope >= 1.8}});
  checks.push_back({{"name", "errors above 3 noise floors"}, {"pass", res.above_noise_floor}});
  ctx.record({{"operation", "py_error_order"}, {"K", o.K}, {"rho", o.rho_list}});
  return finish_report(ctx, "py_order.json",
                       checks_report("py-order", checks, {{"fit", json::parse(res.to_json())}}));
}

int cmd_calibration(Context& ctx, const Options& o) {
  const double n_sigma = ctx.real("oz.n_sigma");
  const auto res = run_calibration(calibration_cases(), o.seeds, ctx.mc(), n_sigma);
  json checks = json::array();
  std::string csv = "case,exact,runs,within,flagged,worst_z\n";
  for (const auto& r : res) {
    const double frac = static_cast<double>(r.within) / r.runs;
    checks.push_back({{"name", r.name},
                      {"exact", r.exact},
                      {"runs", r.runs},
                      {"within", r.within},
                      {"fraction", frac},
                      {"worst_z", r.worst_z},
                      {"pass", frac >= 0.99}});
    csv += r.name + "," + num(r.exact) + "," + std::to_string(r.runs) + "," +
           std::to_string(r.within) + "," + std::to_string(r.flagged) + "," + num(r.worst_z) +
           "\n";
  }
  ctx.csv("calibration.csv", csv);
  ctx.record({{"operation", "run_calibration"}, {"seeds", o.seeds}, {"n_sigma", n_sigma}});
  return finish_report(ctx, "calibration.json", checks_report("mc-calibration", checks));
}

int cmd_decay(Context& ctx, const Options& o) {
  const PairPotential p = ctx.potential();
  const double rho = o.rho_c / c_beta(p);
  const auto radii = scaled(o.radii.empty() ? default_oz_radii() : o.radii, p.sigma());
  const CoefficientTable t =
      build_h_table(o.K, radii, p, ctx.mc(), Normalization::OzConsistent, ctx.enum_opts());
  std::vector<double> contrib, err;
  std::string csv = "k,contribution,std_error,worst_r\n";
  for (int k = 1; k <= o.K; ++k) {
    std::size_t arg = 0;
    for (std::size_t a = 0; a < radii.size(); ++a)
      if (std::fabs(t.value(k, a)) > std::fabs(t.value(k, arg))) arg = a;
    const double w = std::pow(rho, k);
    contrib.push_back(w * std::fabs(t.value(k, arg)));
    err.push_back(w * t.std_error(k, arg));
    csv += std::to_string(k) + "," + points_csv_row({contrib.back(), err.back(), radii[arg]});
  }
  ctx.csv("decay.csv", csv);
  const double n_sigma = ctx.real("oz.n_sigma");
  json checks = json::array();
  for (std::size_t i = 0; i + 1 < contrib.size(); ++i) {
    const double tol = n_sigma * std::hypot(err[i], err[i + 1]);
    checks.push_back({{"name", "order " + std::to_string(i + 2) + " <= order " +
                                   std::to_string(i + 1)},
                      {"lower", contrib[i]},
                      {"higher", contrib[i + 1]},
                      {"tolerance", tol},
                      {"pass", contrib[i + 1] <= contrib[i] + tol}});
  }
  ctx.record({{"operation", "tail_decay"}, {"rho", rho}, {"rho_c", o.rho_c}, {"K", o.K}});
  return finish_report(ctx, "decay.json",
                       checks_report("decay", checks, {{"rho", rho}, {"c_beta", c_beta(p)}}));
}

double contact_value(const RadialFunction& g, double sigma) {
  const std::size_t j = static_cast<std::size_t>(std::lround(sigma / g.dr()));
  if (j < g.size() && std::fabs(g.r(j) - sigma) < 1e-9 * sigma && g.is_split(j)) return g.right(j);
  return g.at(sigma * (1 + 1e-12));
}

int cmd_py_solve(Context& ctx, const Options& o) {
  const PairPotential p = ctx.potential();
  PyOptions opts = ctx.py_options();
  const PyResult res = py_solve(p, o.rho, ctx.grid(), opts);
  ctx.raw("py_fields.csv", fields_csv(res.fields, ctx.hash));
  json diag = json::parse(res.diagnostics.to_json());
  diag["rho"] = o.rho;
  diag["contact_value"] = contact_value(res.fields.g, p.sigma());
  ctx.json_file("py_diagnostics.json", diag);
  ctx.record({{"operation", "py_solve"}, {"rho", o.rho}});
  if (ctx.out_dir) {
    diag["manifest"] = ctx.hash;
    ctx.flush(diag.dump(2) + "\n");
  } else {
    ctx.flush(fields_csv(res.fields, ctx.hash));
  }
  return kPass;
}

int cmd_py_sweep(Context& ctx, const Options& o) {
  const PairPotential p = ctx.potential();
  PyOptions opts = ctx.py_options();
  opts.t_form_check = false;
  const GridSpec grid = ctx.grid();
  std::vector<std::optional<PyResult>> results(o.rho_list.size());
  parallel_for(o.rho_list.size(), ctx.threads(),
               [&](std::size_t i) { results[i] = py_solve(p, o.rho_list[i], grid, opts); });
  std::string csv = "rho,iterations,residual,contact_value,c0\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = *results[i];
    csv += num(o.rho_list[i]) + "," + std::to_string(r.diagnostics.iterations) + "," +
           points_csv_row({r.diagnostics.residual, contact_value(r.fields.g, p.sigma()),
                           r.fields.c[0]});
    char name[32];
    std::snprintf(name, sizeof name, "py_fields_%02zu.csv", i);
    ctx.raw(name, fields_csv(r.fields, ctx.hash));
  }
  ctx.csv("sweep.csv", csv);
  ctx.record({{"operation", "py_sweep"}, {"rho", o.rho_list}});
  ctx.flush("# manifest: " + ctx.hash + "\n" + csv);
  return kPass;
}

int cmd_oz_solve(Context& ctx, const Options& o) {
  std::vector<double> r, v;
  read_radial_csv(o.c_file, r, v);
  if (r.size() < 2) throw ConfigError("need at least two rows in " + o.c_file);
  const double dr = r[1] - r[0];
  for (std::size_t j = 0; j < r.size(); ++j)
    if (std::fabs(r[j] - dr * static_cast<double>(j)) > 1e-9 * std::max(1.0, r[j]))
      throw ConfigError("c(r) must sit on a uniform grid starting at r = 0");
  const int d = static_cast<int>(ctx.integer("potential.d"));
  const RadialFunction c(dr, v, d);
  OzSolveReport rep;
  const RadialFunction h = oz_solve_h(c, o.rho, &rep);
  std::string csv = "r,c,h\n";
  for (std::size_t j = 0; j < h.size(); ++j) csv += points_csv_row({c.r(j), c[j], h[j]});
  ctx.csv("oz_solution.csv", csv);
  ctx.json_file("oz_solution.json", {{"rho", o.rho},
                                     {"residual_sup", rep.residual_sup},
                                     {"residual_l1", rep.residual_l1},
                                     {"min_denominator", rep.min_denominator}});
  ctx.record({{"operation", "oz_solve_h"}, {"rho", o.rho}, {"points", r.size()}});
  ctx.flush("# manifest: " + ctx.hash + "\n" + csv);
  return kPass;
}

// ------------------------------------------------------------ dispatch

struct Parsed {
  std::function<int(Context&, const Options&)> handler;
  std::string default_kind = "hard_sphere";
};

std::string help_text(CLI::App& app) { return app.help(); }

int execute(const std::vector<std::string>& command, const std::optional<Config>& preset,
            const std::vector<std::pair<std::string, std::string>>& flags,
            std::optional<std::string> out_dir, std::ostream& out, std::ostream& err);

int cmd_rerun(const std::string& manifest_path, const std::vector<std::pair<std::string, std::string>>& flags,
              std::optional<std::string> out_dir, std::ostream& out, std::ostream& err) {
  std::ifstream in(manifest_path);
  if (!in) throw ConfigError("manifest not found: " + manifest_path);
  json m;
  try {
    m = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
  if (!m.contains("command") || !m.contains("config"))
    throw ConfigError("manifest lacks command or config");
  Config cfg = m.at("config").get<Config>();
  for (const auto& [k, v] : flags) {
    if (k == "run.threads") {
      set_key(cfg, k, v);
    } else if (k != "@out") {
      throw ConfigError("rerun only accepts --out and --threads");
    }
  }
  const auto command = m.at("command").get<std::vector<std::string>>();
  std::ostringstream sink;
  const int code = execute(command, cfg, {}, out_dir, sink, err);
  std::string expected = m.value("hash", "");
  json summary{{"rerun", manifest_path}, {"exit_code", code}};
  // The hash is recomputed from the same command and config; a mismatch
  // means a different tool version.
  if (out_dir) {
    std::ifstream nm(fs::path(*out_dir) / "manifest.json");
    if (nm) summary["hash"] = json::parse(nm).value("hash", "");
  }
  summary["expected_hash"] = expected;
  out << summary.dump(2) << "\n";
  return code;
}

int execute(const std::vector<std::string>& command, const std::optional<Config>& preset,
            const std::vector<std::pair<std::string, std::string>>& flags,
            std::optional<std::string> out_dir, std::ostream& out, std::ostream& err) {
  CLI::App app{"clusterkit: cluster expansions, Ornstein-Zernike checks and PY closures",
               "clusterkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.footer(kGlobalHelp);
  Options o;
  Parsed parsed;
  auto bind = [&](CLI::App* sub, std::function<int(Context&, const Options&)> fn) {
    sub->callback([&parsed, fn] { parsed.handler = fn; });
  };

  // graphs
  auto* graphs = app.add_subcommand("graphs", "enumerate colored graphs");
  graphs->require_subcommand(1);
  auto* gcount = graphs->add_subcommand("count", "count (and list) one class");
  gcount->add_option("--white", o.white, "white vertices")->required();
  gcount->add_option("--black", o.black, "black vertices")->required();
  gcount->add_option("--class", o.cls, "af | two | conn | all")->capture_default_str();
  gcount->add_flag("--list", o.list, "print every graph as JSON");
  bind(gcount, cmd_graphs_count);
  auto* gcensus = graphs->add_subcommand("census", "counts of every class as CSV");
  gcensus->add_option("--max-vertices", o.census_max)->capture_default_str();
  gcensus->add_option("--max-white", o.census_max_white)->capture_default_str();
  bind(gcensus, cmd_graphs_census);

  // coeff
  auto* coeff = app.add_subcommand("coeff", "density-series coefficient tables");
  coeff->require_subcommand(1);
  for (const char* t : {"h2", "c2", "virial"}) {
    auto* sub = coeff->add_subcommand(t, std::string(t) + " coefficients");
    if (std::string(t) == "virial") {
      sub->add_option("--m", o.m, "highest virial order")->capture_default_str();
    } else {
      sub->add_option("--k", o.k, "highest order")->capture_default_str();
      sub->add_option("--radii", o.radii, "separations in units of sigma")->delimiter(',');
      sub->add_option("--grid", o.grid, "STEP,RMAX in units of sigma")->delimiter(',');
      if (std::string(t) == "h2")
        sub->add_option("--normalization", o.normalization, "oz_consistent | literal")
            ->capture_default_str();
    }
    const std::string target = t;
    sub->callback([&parsed, &o, target] {
      o.target = target;
      parsed.handler = cmd_coeff;
    });
  }

  // verify and identity share handlers
  auto add_oz_check = [&](CLI::App* parent, const char* name) {
    auto* sub = parent->add_subcommand(name, "Ornstein-Zernike order-by-order check");
    sub->add_option("--k", o.k_list, "orders")->delimiter(',');
    sub->add_option("--radii", o.radii, "separations in units of sigma")->delimiter(',');
    sub->add_option("--normalization", o.normalization)->capture_default_str();
    bind(sub, cmd_oz_check);
  };
  auto add_dissymmetry = [&](CLI::App* parent) {
    auto* sub = parent->add_subcommand("dissymmetry", "activity/density inversion identity");
    sub->add_option("--order", o.order)->capture_default_str();
    sub->add_flag("--exact-1d", o.exact_1d, "hard rods in rational arithmetic");
    bind(sub, cmd_dissymmetry);
  };
  auto add_cancellation = [&](CLI::App* parent) {
    auto* sub = parent->add_subcommand("cancellation", "multi-index cancellation, exhaustive");
    sub->add_option("--max-vertices", o.max_vertices)->capture_default_str();
    bind(sub, cmd_cancellation);
  };
  auto add_census = [&](CLI::App* parent) {
    auto* sub = parent->add_subcommand("census", "OZ census identity");
    sub->add_option("--k", o.k_list, "orders")->delimiter(',');
    bind(sub, cmd_census_identity);
  };

  auto* verify = app.add_subcommand("verify", "pass/fail reports");
  verify->require_subcommand(1);
  add_oz_check(verify, "oz");
  add_dissymmetry(verify);
  add_cancellation(verify);
  add_census(verify);
  auto* vpy = verify->add_subcommand("py-order", "PY closure error order in rho");
  vpy->add_option("--rho", o.rho_list, "densities")->delimiter(',');
  vpy->add_option("--K", o.K, "series order")->capture_default_str();
  vpy->add_option("--radii", o.radii, "anchors in units of sigma")->delimiter(',');
  vpy->add_option("--order-dr", o.order_dr, "grid step in units of sigma")->capture_default_str();
  vpy->add_option("--order-points", o.order_points)->capture_default_str();
  bind(vpy, cmd_py_order);
  auto* vcal = verify->add_subcommand("mc-calibration", "Monte Carlo against known integrals");
  vcal->add_option("--seeds", o.seeds)->capture_default_str();
  bind(vcal, cmd_calibration);
  auto* vdecay = verify->add_subcommand("decay", "per-order contributions decrease");
  vdecay->add_option("--rho-c", o.rho_c, "rho * C(beta)")->capture_default_str();
  vdecay->add_option("--K", o.K)->capture_default_str();
  vdecay->add_option("--radii", o.radii, "separations in units of sigma")->delimiter(',');
  bind(vdecay, cmd_decay);

  auto* identity = app.add_subcommand("identity", "combinatorial and series identities");
  identity->require_subcommand(1);
  add_census(identity);
  add_dissymmetry(identity);
  add_cancellation(identity);

  auto* oz = app.add_subcommand("oz", "Ornstein-Zernike");
  oz->require_subcommand(1);
  auto* ozs = oz->add_subcommand("solve", "h from c on a radial grid");
  ozs->add_option("--c", o.c_file, "CSV r,c(r) on 0, dr, 2 dr, ...")->required();
  ozs->add_option("--rho", o.rho)->required();
  bind(ozs, cmd_oz_solve);
  add_oz_check(oz, "check");

  auto* py = app.add_subcommand("py", "Percus-Yevick closure");
  py->require_subcommand(1);
  auto* pys = py->add_subcommand("solve", "one density");
  pys->add_option("--rho", o.rho)->required();
  auto* pyw = py->add_subcommand("sweep", "several densities");
  pyw->add_option("--rho", o.rho_list)->delimiter(',')->required();
  bind(pys, cmd_py_solve);
  bind(pyw, cmd_py_sweep);

  std::vector<std::string> reversed(command.rbegin(), command.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << help_text(app);
    return kPass;
  } catch (const CLI::CallForAllHelp&) {
    out << help_text(app);
    return kPass;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kPass;
  }
  if (!parsed.handler) throw CLI::CallForHelp();
  if (o.exact_1d) parsed.default_kind = "hard_rod";

  Context ctx;
  ctx.out = &out;
  ctx.command = command;
  ctx.out_dir = std::move(out_dir);
  ctx.config = preset ? *preset : layered_config(flags, parsed.default_kind);
  for (const auto& [k, v] : ctx.config)
    if (!is_potential_key(k)) normalize(k, v);
  for (const auto& [k, def] : schema())
    if (!ctx.config.count(k)) ctx.config[k] = def.fallback;
  canonicalize_potential(ctx.config);
  ctx.compute_hash();
  (void)err;
  return parsed.handler(ctx, o);
}

int error_exit(std::ostream& err, const std::string& kind, const std::string& message, int code) {
  json j{{"error", kind}, {"message", message}, {"exit_code", code}};
  err << j.dump() << "\n";
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    const Extracted ex = extract_globals(args);
    std::optional<std::string> out_dir;
    for (const auto& [k, v] : ex.flags)
      if (k == "@out") out_dir = v;
    if (!ex.command.empty() && ex.command.front() == "rerun") {
      if (ex.command.size() != 2) throw CLI::ArgumentMismatch("usage: rerun MANIFEST [--out DIR]");
      return cmd_rerun(ex.command[1], ex.flags, out_dir, out, err);
    }
    return execute(ex.command, std::nullopt, ex.flags, out_dir, out, err);
  } catch (const CLI::CallForHelp&) {
    out << "usage: clusterkit <graphs|coeff|verify|identity|oz|py|rerun> ... (--help for details)\n";
    return kUsage;
  } catch (const CLI::ParseError& e) {
    return error_exit(err, "usage", e.what(), kUsage);
  } catch (const NumericalError& e) {
    return error_exit(err, e.kind(), e.what(), kNumerical);
  } catch (const Error& e) {
    return error_exit(err, e.kind(), e.what(), kUsage);
  } catch (const fs::filesystem_error& e) {
    return error_exit(err, "io", e.what(), kUsage);
  } catch (const std::exception& e) {
    return error_exit(err, "internal", e.what(), kNumerical);
  }
}

}  // namespace clusterkit::cli
