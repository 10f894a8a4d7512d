#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "monoext/errors.hpp"
#include "monoext/io.hpp"
#include "monoext/oracle.hpp"
#include "monoext/rationalize.hpp"
#include "monoext/scenario.hpp"
#include "monoext/suites.hpp"

namespace fs = std::filesystem;
using namespace monoext;

namespace {

constexpr const char* kOutDirEnv = "MONOEXT_OUT_DIR";

struct Job {
  fs::path input;
  int exit_code = kExitError;
  std::string message;
  ScenarioRun run;
  bool produced = false;
};

void solve(Job& job, bool svg) {
  try {
    const nlohmann::json scenario = parse_scenario(read_text_file(job.input.string()));
    RunOptions opt;
    opt.svg = svg;
    opt.base_dir = job.input.parent_path();
    job.run = run_scenario(scenario, opt);
    job.exit_code = job.run.exit_code;
    job.produced = true;
    job.message = job.run.result.value("status", "");
  } catch (const std::exception& e) {
    job.exit_code = kExitError;
    job.message = e.what();
  }
}

// Everything goes to temporaries first; the renames only start once every
// file of the scenario has been written.
bool write_outputs(const Job& job, const fs::path& out_dir, std::vector<fs::path>& written) {
  const std::string stem = job.input.stem().string();
  std::vector<std::pair<fs::path, fs::path>> staged;
  auto discard = [&] {
    std::error_code ec;
    for (const auto& [tmp, final_path] : staged) fs::remove(tmp, ec);
  };
  for (const OutputFile& f : job.run.files) {
    const fs::path final_path = out_dir / (stem + f.suffix);
    fs::path tmp = final_path;
    tmp += ".tmp";
    std::ofstream out(tmp, std::ios::binary);
    out << f.content;
    out.close();
    if (!out) {
      staged.emplace_back(tmp, final_path);
      discard();
      return false;
    }
    staged.emplace_back(tmp, final_path);
  }
  for (const auto& [tmp, final_path] : staged) {
    fs::rename(tmp, final_path);
    written.push_back(final_path);
  }
  return true;
}

int command_run(const std::vector<std::string>& files, bool svg, std::string out_dir, int jobs) {
  if (out_dir.empty()) {
    const char* env = std::getenv(kOutDirEnv);
    out_dir = env && *env ? env : ".";
  }
  std::vector<Job> work(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) work[i].input = files[i];

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) solve(work[i], svg);
  };
  const int threads = std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(work.size(), 1)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int worst = kExitOk;
  for (const Job& job : work) {
    if (job.produced) {
      std::error_code ec;
      fs::create_directories(out_dir, ec);
      std::vector<fs::path> written;
      if (ec || !write_outputs(job, out_dir, written)) {
        std::cerr << job.input.string() << ": cannot write to " << out_dir << "\n";
        worst = std::max(worst, static_cast<int>(kExitError));
        continue;
      }
      std::cout << job.input.string() << ": " << job.message << " (exit " << job.exit_code << ")\n";
      for (const auto& p : written) std::cout << "  " << p.string() << "\n";
      if (job.run.result.contains("error")) std::cerr << job.input.string() << ": " << job.run.result["error"].get<std::string>() << "\n";
    } else {
      std::cerr << job.input.string() << ": " << job.message << "\n";
    }
    worst = std::max(worst, job.exit_code);
  }
  return worst;
}

int command_suite(const std::string& name, std::uint64_t seed, bool force_fail, const std::string& out_file) {
  if (!is_suite(name)) {
    std::cerr << "unknown suite '" << name << "'; available:";
    for (const auto& s : suites()) std::cerr << " " << s.name;
    std::cerr << "\n";
    return kExitError;
  }
  const SuiteReport report = run_suite(name, {seed, force_fail});
  const std::string text = report.to_json().dump(2) + "\n";
  if (out_file.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_file, std::ios::binary);
    out << text;
    if (!out) {
      std::cerr << "cannot write " << out_file << "\n";
      return kExitError;
    }
    std::cout << name << ": " << (report.passed() ? "PASS" : "FAIL") << " (" << report.checks() << " checks, "
              << report.failed() << " failed)\n";
  }
  return report.passed() ? kExitOk : kExitError;
}

nlohmann::json masks_json(const std::vector<std::vector<double>>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    std::string bits;
    for (double v : r) bits += v > 0.5 ? '1' : '0';
    out.push_back(bits);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monotone function extreme points: scenarios, property suites and brute-force oracles"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "solve scenario files and write result files");
  std::vector<std::string> files;
  bool svg = false;
  std::string out_dir;
  int jobs = 1;
  run->add_option("files", files, "scenario JSON files")->required()->check(CLI::ExistingFile);
  run->add_flag("--svg", svg, "also write SVG heatmaps");
  run->add_option("--out", out_dir, std::string("output directory (default: $") + kOutDirEnv + " or .)");
  run->add_option("--jobs,-j", jobs, "scenarios solved concurrently")->check(CLI::PositiveNumber);

  auto* suite = app.add_subcommand("suite", "run a property suite and print its JSON summary");
  std::string suite_name, suite_out;
  std::uint64_t seed = 0;
  bool force_fail = false;
  suite->add_option("name", suite_name, "suite name")->required();
  suite->add_option("--seed", seed, "64-bit seed");
  suite->add_flag("--force-fail", force_fail, "add a failing check to exercise the exit code");
  suite->add_option("--out", suite_out, "write the summary here instead of stdout");

  auto* oracle_cmd = app.add_subcommand("oracle", "brute-force reference computations on small grids");
  oracle_cmd->require_subcommand(1);
  std::string shape_text;
  auto* upsets = oracle_cmd->add_subcommand("upsets", "enumerate the up-sets of a grid (at most 25 cells)");
  upsets->add_option("--shape", shape_text, "grid such as 2x3")->required();
  auto* verts = oracle_cmd->add_subcommand("vertices", "vertices of the monotone [0,1] polytope (at most 12 cells)");
  verts->add_option("--shape", shape_text, "grid such as 2x3")->required();
  std::string csv_path;
  bool among_monotone = false;
  auto* unique = oracle_cmd->add_subcommand("unique", "is a grid function the only one with its marginals?");
  unique->add_option("csv", csv_path, "grid CSV (at most 12 cells)")->required()->check(CLI::ExistingFile);
  unique->add_flag("--monotone", among_monotone, "compare only against monotone functions");
  std::vector<std::string> marginal_paths;
  auto* rat = oracle_cmd->add_subcommand("rationalizable", "do these marginals come from some [0,1]-valued function?");
  rat->add_option("marginals", marginal_paths, "one column CSV per axis")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return command_run(files, svg, out_dir, jobs);
    if (*suite) return command_suite(suite_name, seed, force_fail, suite_out);

    nlohmann::json out;
    if (*upsets) {
      const Shape shape = Shape::parse(shape_text);
      std::vector<std::vector<double>> rows;
      for (const auto& m : oracle::enumerate_upsets(shape)) rows.emplace_back(m.begin(), m.end());
      out = {{"shape", shape.to_string()}, {"count", rows.size()}, {"upsets", masks_json(rows)}};
    } else if (*verts) {
      const Shape shape = Shape::parse(shape_text);
      const auto v = oracle::brute_force_vertices(LpProblem::over_grid(shape, true));
      out = {{"shape", shape.to_string()}, {"count", v.size()}, {"vertices", masks_json(v)}};
    } else if (*unique) {
      const GridFunction f = parse_grid_csv(read_text_file(csv_path));
      out = {{"shape", f.shape().to_string()},
             {"among_monotone", among_monotone},
             {"unique", oracle::brute_force_unique(f, among_monotone)}};
    } else if (*rat) {
      std::vector<std::vector<double>> q;
      for (const auto& p : marginal_paths) q.push_back(parse_column_csv(read_text_file(p)));
      out = {{"axes", q.size()}, {"rationalizable", oracle::brute_force_rationalizable(q)}};
    }
    std::cout << out.dump(2) << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitError;
  }
}
