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

// Named experiment pipelines driven by flat key-value configurations. Each
// run is a pure function of its configuration and returns metrics, a
// pass/fail verdict against the configured thresholds, and CSV artifacts.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "randtomo/keyvalue.hpp"

namespace randtomo {

struct ExperimentDescriptor {
  std::string name;
  std::string summary;
  std::vector<std::pair<std::string, std::string>> required;  // key, example value
  std::vector<std::pair<std::string, std::string>> optional;  // key, default
  std::vector<std::string> artifacts;
};

struct ExperimentResult {
  bool passed = false;
  std::vector<std::pair<std::string, std::string>> inputs;  // effective config, defaults included
  std::vector<std::pair<std::string, std::string>> metrics;
  std::vector<std::pair<std::string, std::string>> files;  // file name, content
  std::vector<std::string> notes;

  void metric(const std::string& key, double value);
  void metric(const std::string& key, const std::string& value);
  /// First metric with the given key; throws std::out_of_range if absent.
  const std::string& get(const std::string& key) const;
};

/// Keys accepted by every experiment.
const std::vector<std::pair<std::string, std::string>>& common_keys();

const std::vector<ExperimentDescriptor>& experiment_descriptors();
/// Throws ConfigError for unknown names.
const ExperimentDescriptor& find_experiment(const std::string& name);

/// A config containing the experiment name, the required keys at their
/// example values and every optional key at its default.
std::string descriptor_config(const ExperimentDescriptor& d);

/// Plain-text table of experiments, their keys and artifacts.
std::string format_experiment_table();

/// Runs the experiment named by the `experiment` key. Throws ConfigError on
/// unknown experiments, missing or unknown keys and malformed values.
ExperimentResult run_experiment(const KeyValues& config);

}  // namespace randtomo
