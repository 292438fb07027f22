// Copyright 2026 The randtomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// randtomo run <config> | list | replay <schedule-file>
//
// Exit codes: 0 all checks pass, 2 a metric check failed, 1 usage or
// configuration error.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "randtomo/circuits.hpp"
#include "randtomo/experiments.hpp"
#include "randtomo/keyvalue.hpp"

namespace fs = std::filesystem;
using namespace randtomo;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitError = 1;
constexpr int kExitFail = 2;

std::string hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Writes via a temporary file in the same directory and renames it into place.
void write_atomically(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

fs::path output_directory(const KeyValues& config, const std::string& hash) {
  if (config.has("output_dir") && !config.get("output_dir").empty()) return config.get("output_dir");
  const char* root = std::getenv("RANDTOMO_OUTPUT_ROOT");
  const fs::path base = root && *root ? fs::path(root) : fs::path("randtomo-runs");
  return base / (config.get("experiment") + "-" + hash.substr(0, 12));
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

int run(const std::string& path) {
  const std::string text = read_file(path);
  const KeyValues config = KeyValues::parse(text);
  if (!config.has("experiment")) throw ConfigError(path + ": missing 'experiment'");
  const std::string hash = hex(fnv1a(config.to_string()));
  const fs::path dir = output_directory(config, hash);

  const ExperimentResult result = run_experiment(config);

  std::ostringstream report;
  report << "experiment: " << config.get("experiment") << "\n"
         << "config: " << path << "\n"
         << "config_hash: " << hash << "\n"
         << "finished: " << timestamp() << "\n\n[inputs]\n"
         ;
  for (const auto& [k, v] : result.inputs) report << k << " = " << v << "\n";
  report << "\n[metrics]\n";
  for (const auto& [k, v] : result.metrics) report << k << " = " << v << "\n";
  if (!result.notes.empty()) {
    report << "\n[notes]\n";
    for (const auto& n : result.notes) report << n << "\n";
  }
  report << "\nresult: " << (result.passed ? "PASS" : "FAIL") << "\n";

  try {
    fs::create_directories(dir);
    for (const auto& [name, content] : result.files) write_atomically(dir / name, content);
    write_atomically(dir / "report.txt", report.str());
  } catch (const std::exception& e) {
    throw ConfigError(std::string("unwritable output: ") + e.what());
  }
  std::cout << report.str() << "output: " << dir.string() << "\n";
  return result.passed ? kExitPass : kExitFail;
}

int replay(const std::string& path) {
  const CircuitSchedule schedule = CircuitSchedule::parse(read_file(path));
  std::cout << "parities:";
  for (int step = 0; step < schedule.depth(); ++step) {
    std::cout << (schedule.parity(step) == Parity::kEven ? " e" : " o");
  }
  std::cout << "\n";
  const Matrix u = run_circuit(schedule).matrix();
  std::string bytes;
  char buf[64];
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g;", u(i, j).real(), u(i, j).imag());
      bytes += buf;
    }
  }
  std::cout << "dim: " << u.rows() << "\nunitary_hash: " << hex(fnv1a(bytes)) << "\n";
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized-measurement tomography experiments"};
  app.require_subcommand(1);
  std::string config_path, schedule_path;
  auto* run_cmd = app.add_subcommand("run", "run the experiment described by a config file");
  run_cmd->add_option("config", config_path, "key = value config file")->required();
  auto* list_cmd = app.add_subcommand("list", "list experiments, their keys and artifacts");
  auto* replay_cmd = app.add_subcommand("replay", "rebuild a serialized circuit and print its fingerprint");
  replay_cmd->add_option("schedule", schedule_path, "serialized circuit schedule")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitError;
  }

  try {
    if (*run_cmd) return run(config_path);
    if (*list_cmd) {
      std::cout << format_experiment_table();
      return kExitPass;
    }
    if (*replay_cmd) return replay(schedule_path);
  } catch (const std::exception& e) {
    std::cerr << "randtomo: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
