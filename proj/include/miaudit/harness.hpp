// Copyright 2026 the mi-audit authors
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

#ifndef MIAUDIT_HARNESS_HPP
#define MIAUDIT_HARNESS_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "miaudit/attacks.hpp"
#include "miaudit/data.hpp"
#include "miaudit/model.hpp"
#include "miaudit/outlier.hpp"

namespace miaudit {

/// Balanced-prior attack metrics; member is the positive class.
struct ScoreEntry {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t true_positives = 0, false_positives = 0;
  std::size_t true_negatives = 0, false_negatives = 0;
  bool balanced = true;
};

ScoreEntry score(const std::vector<MembershipPrediction>& predictions,
                 const std::vector<bool>& truth_member);

struct AttackResult {
  std::string name;
  std::string kind;
  ScoreEntry metrics;
  std::uint64_t queries_total = 0;
  std::vector<MembershipPrediction> predictions;
  nlohmann::json tuned;  // per-attack tuned parameters (tau, sigma, ...)
};

struct OutlierReport {
  OutlierParams params;
  std::vector<std::uint64_t> outlier_ids;
  // Per attack: precision on the outlier subset vs the full balanced set.
  std::map<std::string, double> outlier_precision_by_attack;
  std::map<std::string, double> full_precision_by_attack;
  std::map<std::string, bool> outlier_precision_defined;
};

struct EvaluationReport {
  std::string config_hash;
  nlohmann::json config;
  double acc_train = 0.0;
  double acc_test = 0.0;
  double shadow_acc_train = 0.0;
  double shadow_acc_test = 0.0;
  std::vector<AttackResult> attacks;
  std::optional<OutlierReport> outliers;
  // Trained models, emitted as checkpoints under <out>/models/.
  std::vector<std::pair<std::string, Classifier>> models;
  // Wall-clock stage timings in seconds. Excluded from report.json so that
  // reports stay byte-identical across runs; emitted to a sidecar instead.
  std::map<std::string, double> timings;

  const AttackResult* find_attack(const std::string& name) const;
};

/// Declarative experiment: dataset, split sizes, target/shadow training,
/// defense wrapper, attack list, optional outlier study. All seeds explicit.
struct ExperimentConfig {
  nlohmann::json raw;

  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_json(nlohmann::json j);
};

/// Runs split -> train target and shadows -> wrap defense -> tune attacks on
/// shadow -> evaluate on the balanced target set -> score. Deterministic
/// given the config seeds; throws stage-tagged errors, never writes partial
/// reports.
EvaluationReport run_experiment(const ExperimentConfig& cfg);

/// Writes report.json (+ metrics.csv alongside when format is "csv" or
/// "both") under out_dir. Timings go to timings.json.
void emit_report(const EvaluationReport& report, const std::string& out_dir,
                 const std::string& format = "both");

nlohmann::json report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const nlohmann::json& j);

std::string metrics_csv(const EvaluationReport& report);

struct SweepResult {
  std::vector<std::pair<nlohmann::json, EvaluationReport>> runs;  // (axis value, report)
  std::vector<std::pair<nlohmann::json, std::string>> failures;   // (axis value, error)
};

/// One experiment per axis value; per-value failures are recorded and the
/// sweep continues. axis is a dot path into the config JSON
/// (e.g. "target.train.epochs" or "attacks.0.aug.d").
SweepResult sweep(const ExperimentConfig& cfg_template, const std::string& axis,
                  const std::vector<nlohmann::json>& values);

/// Long-form rows: axis value, attack, metric, value (plus acc_test for the
/// privacy/utility frontier).
std::string sweep_csv(const SweepResult& result, const std::string& axis);

/// FNV-1a over the canonical (sorted-key) config dump.
std::string config_hash_hex(const nlohmann::json& config);

}  // namespace miaudit

#endif  // MIAUDIT_HARNESS_HPP
