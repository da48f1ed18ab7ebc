// driftlab command line: run experiment configs and shipped demos.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "driftlab/errors.hpp"
#include "driftlab/experiment.hpp"

namespace {

unsigned resolve_workers(unsigned flag) {
  if (const char* env = std::getenv("DRIFTLAB_WORKERS")) {
    try {
      const long v = std::stol(env);
      if (v >= 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring malformed DRIFTLAB_WORKERS='" << env << "'\n";
  }
  return flag;
}

int run_target(const std::string& target, const std::string& out_dir, unsigned workers) {
  driftlab::RunOptions options;
  options.workers = workers;
  options.output_dir = out_dir;
  driftlab::RunManifest manifest;
  const std::string prefix = "demo:";
  if (target.rfind(prefix, 0) == 0) {
    try {
      const auto& demo = driftlab::find_demo(target.substr(prefix.size()));
      manifest = driftlab::run_document(demo.config, options);
    } catch (const driftlab::Error& e) {
      std::cerr << e.what() << '\n';
      return 1;
    }
  } else {
    std::ifstream in(target);
    if (!in) {
      std::cerr << "ConfigInvalid: cannot open " << target << '\n';
      return 1;
    }
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
      std::cerr << "ConfigInvalid: " << target << ": " << e.what() << '\n';
      return 1;
    }
    manifest = driftlab::run_document(doc, options,
                                      std::filesystem::path(target).parent_path());
  }
  driftlab::write_manifest(manifest, std::cout);
  if (!manifest.error.empty()) std::cerr << manifest.error << '\n';
  return manifest.exit_code();
}

int list_or_export(const std::string& export_dir) {
  for (const auto& d : driftlab::list_demos()) {
    std::cout << d.name << "  " << d.description << '\n';
  }
  if (export_dir.empty()) return 0;
  std::filesystem::create_directories(export_dir);
  for (const auto& d : driftlab::list_demos()) {
    std::ofstream out(std::filesystem::path(export_dir) / (d.name + ".json"));
    out << d.config.dump(2) << '\n';
  }
  return 0;
}

// One row of block characters scaled between the column's min and max.
int sparkline(const std::string& csv, const std::string& column, int width) {
  std::ifstream in(csv);
  if (!in) {
    std::cerr << "cannot open " << csv << '\n';
    return 1;
  }
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  std::size_t col = header.size() > 1 ? 1 : 0;
  if (!column.empty()) {
    const auto it = std::find(header.begin(), header.end(), column);
    if (it == header.end()) {
      std::cerr << "no column '" << column << "' in " << csv << '\n';
      return 1;
    }
    col = static_cast<std::size_t>(it - header.begin());
  }
  std::vector<double> values;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    for (std::size_t i = 0; std::getline(ss, cell, ','); ++i) {
      if (i == col) {
        values.push_back(std::strtod(cell.c_str(), nullptr));
        break;
      }
    }
  }
  if (values.empty()) {
    std::cerr << "no data rows\n";
    return 1;
  }
  const int buckets = std::max(1, std::min<int>(width, static_cast<int>(values.size())));
  std::vector<double> means(static_cast<std::size_t>(buckets), 0.0);
  for (int b = 0; b < buckets; ++b) {
    const std::size_t lo = values.size() * static_cast<std::size_t>(b) / buckets;
    const std::size_t hi = values.size() * static_cast<std::size_t>(b + 1) / buckets;
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += values[i];
    means[static_cast<std::size_t>(b)] = s / static_cast<double>(hi - lo);
  }
  const auto [mn, mx] = std::minmax_element(means.begin(), means.end());
  static const char* bars[] = {"▁", "▂", "▃", "▄", "▅", "▆", "▇", "█"};
  for (double v : means) {
    const double t = *mx > *mn ? (v - *mn) / (*mx - *mn) : 0.0;
    std::cout << bars[std::clamp(static_cast<int>(t * 7.999), 0, 7)];
  }
  std::cout << "  " << header[col] << " [" << *mn << ", " << *mx << "]\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"driftlab: moment bounds and ergodicity checks for Markov-type processes"};
  app.require_subcommand(1);
  unsigned workers = 0;
  app.add_option("--workers", workers, "worker threads (0: all cores; DRIFTLAB_WORKERS wins)");

  std::string target, out_dir;
  auto* run = app.add_subcommand("run", "run a config file or demo:<name>");
  run->add_option("target", target, "config path or demo:<name>")->required();
  run->add_option("-o,--out", out_dir, "output directory (overrides the config)");
  run->add_option("--workers", workers, "worker threads");

  std::string export_dir;
  auto* demos = app.add_subcommand("demos", "list shipped demos");
  demos->add_option("--export", export_dir, "write each demo config as <name>.json here");

  app.add_subcommand("version", "print the toolkit version");

  std::string csv, column;
  int width = 60;
  auto* spark = app.add_subcommand("spark", "ASCII sparkline of one CSV column");
  spark->add_option("csv", csv, "CSV file")->required();
  spark->add_option("-c,--column", column, "column name (default: second column)");
  spark->add_option("-w,--width", width, "characters")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (run->parsed()) return run_target(target, out_dir, resolve_workers(workers));
  if (demos->parsed()) return list_or_export(export_dir);
  if (spark->parsed()) return sparkline(csv, column, width);
  std::cout << "driftlab " << driftlab::version() << '\n';
  return 0;
}
