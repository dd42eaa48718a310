// Acceptance runner: one PASS/FAIL line per criterion.
//
// Criteria 4-8 go through the command-line front end in-process with --out,
// so criterion 10 can rerun their manifests and diff the files.
//
// Exit status is 0 when every failure is in kKnownFailures (criteria whose
// literal statement does not hold; see the README), 1 otherwise.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"
#include "clusterkit/expansion.hpp"
#include "clusterkit/graphs.hpp"
#include "clusterkit/oz.hpp"
#include "clusterkit/potentials.hpp"
#include "oracles/brute_graphs.hpp"
#include "oracles/liquids.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace clusterkit;

namespace {

const std::set<int> kKnownFailures{3};

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct CliRun {
  int code = 0;
  std::string out, err;
};

CliRun cli_run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

json load_json(const fs::path& p) { return json::parse(slurp(p)); }

std::string failing_names(const json& report) {
  std::string s;
  for (const auto& f : report.value("failing", json::array())) s += " " + f.get<std::string>();
  return s;
}

// Rows of a CSV written by the tool; comment lines and the header are skipped.
std::vector<std::vector<double>> read_csv(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::vector<std::vector<double>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ------------------------------------------------------------ criteria

Outcome census_vs_brute_force() {
  const auto t0 = std::chrono::steady_clock::now();
  int cases = 0, mismatches = 0;
  for (int w = 1; w <= 3; ++w) {
    for (int b = 0; w + b <= 6; ++b) {
      if (w + b < 2) continue;
      const auto want = oracle::census(w, b);
      const std::pair<GraphClass, std::uint64_t> classes[] = {
          {GraphClass::All, want.all},
          {GraphClass::Connected, want.conn},
          {GraphClass::ArticulationFree, want.af},
          {GraphClass::TwoConnected, want.two}};
      for (const auto& [cls, n] : classes) {
        ++cases;
        if (count(w, b, cls) != n) ++mismatches;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 60.0,
          std::to_string(cases) + " class counts, " + std::to_string(mismatches) +
              " mismatches, " + fmt("%.1f s", secs)};
}

Outcome cancellation_exhaustive(const fs::path& dir) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = cli_run({"verify", "cancellation", "--max-vertices", "6", "--out", dir.string()});
  const double secs = seconds_since(t0);
  const json rep = load_json(dir / "cancellation.json");
  std::size_t graphs = 0;
  for (const auto& c : rep.at("checks")) graphs += c.value("graphs", 0);
  return {r.code == 0 && rep.at("pass").get<bool>() && secs < 600.0,
          std::to_string(graphs) + " graphs, " + fmt("%.1f s", secs) + failing_names(rep)};
}

Outcome census_identity_literal() {
  bool all = true;
  std::string d;
  for (int k = 1; k <= 3; ++k) {
    const auto c = oz_census_identity(k);
    all = all && c.holds_without_label_factor;
    d += "k=" + std::to_string(k) + ": AF " + std::to_string(c.articulation_free) + " vs " +
         std::to_string(c.two_connected) + "+" + std::to_string(c.nodal_split_without_label_factor) +
         " (with factor k: " + std::to_string(c.two_connected) + "+" +
         std::to_string(c.nodal_split) + (c.holds ? " holds" : " fails") + "); ";
  }
  return {all, d};
}

Outcome oz_order_check(const fs::path& dir) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = cli_run({"verify", "oz", "--k", "1,2", "--kind", "hard_sphere", "--sigma", "1",
                          "--samples", "10000000", "--out", dir.string()});
  const double secs = seconds_since(t0);
  const json rep = load_json(dir / "oz_check.json");
  double worst = 0.0;
  int residuals = 0;
  for (const auto& c : rep.at("checks")) {
    if (!c.contains("residual")) continue;
    ++residuals;
    const double se = c.at("std_error").get<double>();
    const double res = std::fabs(c.at("residual").get<double>());
    if (se > 0) worst = std::max(worst, res / se);
  }
  return {r.code == 0 && rep.at("pass").get<bool>() && residuals == 20 && secs < 1800.0,
          std::to_string(residuals) + " residuals, worst |res|/se " + fmt("%.2f", worst) + ", " +
              fmt("%.0f s", secs) + failing_names(rep)};
}

Outcome exact_rod_suite(const fs::path& dir) {
  bool ok = true;
  std::string d = "beta_m:";
  for (int m = 1; m <= 3; ++m) {
    const Rational got = virial_beta_exact_hard_rod(m);
    const Rational want = -Rational(m + 1) / Rational(m);
    ok = ok && got == want;
    d += " " + got.str();
    const auto est = virial_beta(m, PairPotential::hard_rod(1.0), McConfig{});
    ok = ok && est.exact && est.exact_value && *est.exact_value == want;
  }
  const auto r = cli_run(
      {"verify", "dissymmetry", "--order", "3", "--exact-1d", "--out", dir.string()});
  const json rep = load_json(dir / "dissymmetry.json");
  int zeros = 0, rows = 0;
  for (const auto& c : rep.at("checks")) {
    if (!c.contains("exact_residual")) continue;
    ++rows;
    if (c.at("exact_residual").get<std::string>() == "0") ++zeros;
  }
  ok = ok && r.code == 0 && rep.at("pass").get<bool>() && rows > 0 && zeros == rows;
  return {ok, d + "; dissymmetry exact zeros " + std::to_string(zeros) + "/" +
                  std::to_string(rows)};
}

Outcome mc_calibration(const fs::path& dir) {
  const auto r = cli_run({"verify", "mc-calibration", "--seeds", "200", "--samples", "20000",
                          "--out", dir.string()});
  const json rep = load_json(dir / "calibration.json");
  int cases = 0;
  double worst = 1.0;
  for (const auto& c : rep.at("checks")) {
    ++cases;
    worst = std::min(worst, c.at("fraction").get<double>());
  }
  return {r.code == 0 && rep.at("pass").get<bool>() && cases == 20,
          std::to_string(cases) + " integrals, lowest within-4se fraction " + fmt("%.3f", worst) +
              failing_names(rep)};
}

Outcome py_solver(const fs::path& hs_dir, const fs::path& rod_dir) {
  const double eta = 0.2;
  const double rho_hs = 6.0 * eta / std::numbers::pi;
  const auto hs = cli_run({"py", "solve", "--kind", "hard_sphere", "--sigma", "1", "--rho",
                           fmt("%.17g", rho_hs), "--mixing", "0.2", "--dr", "0.0025", "--points",
                           "4096", "--out", hs_dir.string()});
  const auto rod = cli_run({"py", "solve", "--kind", "hard_rod", "--sigma", "1", "--rho", "0.3",
                            "--dr", "0.005", "--points", "4000", "--out", rod_dir.string()});
  if (hs.code != 0 || rod.code != 0) return {false, "solver failed: " + hs.err + rod.err};

  auto at_contact = [](double r, double dr) { return std::fabs(r - 1.0) < 0.5 * dr; };
  // Columns: r, g, h, c, t, y.
  double err_c = 0.0;
  for (const auto& row : read_csv(hs_dir / "py_fields.csv")) {
    if (at_contact(row[0], 0.0025)) continue;
    err_c = std::max(err_c, std::fabs(row[3] - oracle::wertheim_c(row[0], eta)));
  }
  double err_g = 0.0;
  for (const auto& row : read_csv(rod_dir / "py_fields.csv")) {
    if (at_contact(row[0], 0.005)) continue;
    err_g = std::max(err_g, std::fabs(row[1] - oracle::tonks_g(row[0], 0.3)));
  }
  const double res_hs = load_json(hs_dir / "py_diagnostics.json").at("residual").get<double>();
  const double res_rod = load_json(rod_dir / "py_diagnostics.json").at("residual").get<double>();
  const double res = std::max(res_hs, res_rod);
  return {err_c < 1e-3 && err_g < 5e-3 && res < 1e-8,
          "(a) sup|c - closed form| " + fmt("%.2e", err_c) + " (b) sup|g - Tonks| " +
              fmt("%.2e", err_g) + " (c) residual " + fmt("%.1e", res)};
}

Outcome closure_error_order(const fs::path& dir) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = cli_run({"verify", "py-order", "--kind", "hard_sphere", "--sigma", "1",
                          "--samples", "1000000", "--out", dir.string()});
  const double secs = seconds_since(t0);
  const json rep = load_json(dir / "py_order.json");
  return {r.code == 0 && rep.at("pass").get<bool>() && secs < 3600.0,
          "slope " + fmt("%.3f", rep.at("checks").at(0).at("slope").get<double>()) + ", " + fmt("%.0f s", secs) +
              failing_names(rep)};
}

Outcome tail_decay(const fs::path& dir) {
  const auto r = cli_run({"verify", "decay", "--kind", "hard_sphere", "--sigma", "1", "--rho-c",
                          "0.05", "--K", "3", "--out", dir.string()});
  const json rep = load_json(dir / "decay.json");
  std::string d = "rho^k max|H_k|:";
  for (const auto& c : rep.at("checks")) d += " " + fmt("%.3e", c.at("lower").get<double>());
  d += " " + fmt("%.3e", rep.at("checks").back().at("higher").get<double>());
  return {r.code == 0 && rep.at("pass").get<bool>(), d + failing_names(rep)};
}

Outcome determinism(const std::vector<fs::path>& dirs, const fs::path& work) {
  int files = 0, differing = 0;
  std::string d;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const fs::path again = work / ("rerun_" + dirs[i].filename().string());
    fs::remove_all(again);
    const auto r =
        cli_run({"rerun", (dirs[i] / "manifest.json").string(), "--out", again.string()});
    if (r.code != 0 && r.code != 1) {
      ++differing;
      d += " rerun of " + dirs[i].filename().string() + " exited " + std::to_string(r.code);
      continue;
    }
    const json manifest = load_json(dirs[i] / "manifest.json");
    for (const auto& name : manifest.at("outputs")) {
      const auto n = name.get<std::string>();
      ++files;
      if (slurp(dirs[i] / n) != slurp(again / n)) {
        ++differing;
        d += " " + dirs[i].filename().string() + "/" + n;
      }
    }
  }
  return {differing == 0 && files > 0,
          std::to_string(files) + " files from " + std::to_string(dirs.size()) +
              " manifests, " + std::to_string(differing) + " differ" + d};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = fs::temp_directory_path() / "clusterkit_acceptance";
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--work" && i + 1 < argc) {
      work = argv[++i];
    } else if (a == "--only" && i + 1 < argc) {
      std::stringstream s(argv[++i]);
      std::string tok;
      while (std::getline(s, tok, ',')) only.insert(std::stoi(tok));
    } else {
      std::cerr << "usage: acceptance [--work DIR] [--only 1,2,...]\n";
      return 2;
    }
  }
  fs::remove_all(work);
  fs::create_directories(work);
  const auto dir = [&](const char* name) { return work / name; };

  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, [] { return census_vs_brute_force(); }},
      {2, [&] { return cancellation_exhaustive(dir("c2_cancellation")); }},
      {3, [] { return census_identity_literal(); }},
      {4, [&] { return oz_order_check(dir("c4_oz")); }},
      {5, [&] { return exact_rod_suite(dir("c5_dissymmetry")); }},
      {6, [&] { return mc_calibration(dir("c6_calibration")); }},
      {7, [&] { return py_solver(dir("c7_py_hs"), dir("c7_py_rod")); }},
      {8, [&] { return closure_error_order(dir("c8_py_order")); }},
      {9, [&] { return tail_decay(dir("c9_decay")); }},
      {10,
       [&] {
         return determinism({dir("c4_oz"), dir("c5_dissymmetry"), dir("c6_calibration"),
                             dir("c7_py_hs"), dir("c7_py_rod"), dir("c8_py_order")},
                            work);
       }},
  };

  std::set<int> failed;
  std::ofstream summary(work / "summary.txt");
  for (const auto& [id, fn] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) failed.insert(id);
    std::ostringstream line;
    line << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << o.detail
         << (o.pass || !kKnownFailures.count(id) ? "" : " [known]") << "\n";
    std::cout << line.str() << std::flush;
    summary << line.str() << std::flush;
  }
  int unexpected = 0;
  for (int id : failed)
    if (!kKnownFailures.count(id)) ++unexpected;
  std::ostringstream tail;
  tail << "summary: " << failed.size() << " failed, " << unexpected << " unexpected\n";
  std::cout << tail.str();
  summary << tail.str();
  return unexpected == 0 ? 0 : 1;
}
