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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "miaudit/errors.hpp"
#include "miaudit/harness.hpp"

namespace {

// Stage-coded exit statuses, stable for scripting.
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitTraining = 4;
constexpr int kExitAttack = 5;
constexpr int kExitIo = 6;
constexpr int kExitOther = 1;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const miaudit::ConfigurationError*>(&e)) return kExitConfig;
  if (dynamic_cast<const miaudit::ParseError*>(&e)) return kExitData;
  if (dynamic_cast<const miaudit::FormatError*>(&e)) return kExitData;
  if (dynamic_cast<const miaudit::SchemaError*>(&e)) return kExitData;
  if (dynamic_cast<const miaudit::SizeError*>(&e)) return kExitData;
  if (dynamic_cast<const miaudit::TrainingError*>(&e)) return kExitTraining;
  if (dynamic_cast<const miaudit::CoverageError*>(&e)) return kExitAttack;
  if (dynamic_cast<const miaudit::IoError*>(&e)) return kExitIo;
  return kExitOther;
}

void print_summary(const miaudit::EvaluationReport& report) {
  std::printf("config %s\n", report.config_hash.c_str());
  std::printf("model  acc_train=%.4f acc_test=%.4f (shadow %.4f/%.4f)\n", report.acc_train,
              report.acc_test, report.shadow_acc_train, report.shadow_acc_test);
  for (const auto& a : report.attacks) {
    std::printf("attack %-22s accuracy=%.4f precision=%.4f recall=%.4f f1=%.4f queries=%llu\n",
                a.name.c_str(), a.metrics.accuracy, a.metrics.precision, a.metrics.recall,
                a.metrics.f1, static_cast<unsigned long long>(a.queries_total));
  }
  if (report.outliers) {
    const auto& o = *report.outliers;
    std::printf("outliers n=%zu delta=%.6f gamma=%zu achieved=%.4f%s\n", o.outlier_ids.size(),
                o.params.delta, o.params.gamma, o.params.achieved_fraction,
                o.params.calibration_ok ? "" : " (calibration warning)");
    for (const auto& [name, prec] : o.outlier_precision_by_attack) {
      std::printf("outlier-precision %-22s %.4f (full %.4f)%s\n", name.c_str(), prec,
                  o.full_precision_by_attack.at(name),
                  o.outlier_precision_defined.at(name) ? "" : " [undefined: no member predictions]");
    }
  }
}

std::vector<nlohmann::json> parse_values(const std::string& csv) {
  std::vector<nlohmann::json> values;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      values.push_back(nlohmann::json::parse(item));
    } catch (const nlohmann::json::exception&) {
      values.push_back(item);  // bare string value
    }
  }
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  std::setvbuf(stdout, nullptr, _IOLBF, 0);  // keep progress visible when piped
  CLI::App app{"mi-audit: membership-inference auditing harness"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", axis, values_csv, report_path;
  std::int64_t seed_override = -1;

  auto* run = app.add_subcommand("run", "Run one experiment from a JSON config");
  run->add_option("config", config_path, "experiment config JSON")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--seed", seed_override, "override split/train/attack seeds");

  auto* sweep_cmd = app.add_subcommand("sweep", "Run one experiment per axis value");
  sweep_cmd->add_option("template", config_path, "experiment template JSON")->required();
  sweep_cmd->add_option("--axis", axis, "dot path of the swept field")->required();
  sweep_cmd->add_option("--values", values_csv, "comma-separated values")->required();
  sweep_cmd->add_option("--out", out_dir, "output directory");

  auto* score_cmd = app.add_subcommand("score", "Recompute metrics from a report");
  score_cmd->add_option("report", report_path, "report.json produced by run")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      auto cfg = miaudit::ExperimentConfig::from_file(config_path);
      if (seed_override >= 0) {
        auto s = static_cast<std::uint64_t>(seed_override);
        cfg.raw["split"]["seed"] = s;
        cfg.raw["target"]["train"]["seed"] = s + 1;
        cfg.raw["shadow"]["seed"] = s + 2;
        cfg.raw["attacks_seed"] = s + 3;
        if (cfg.raw["dataset"].contains("seed")) cfg.raw["dataset"]["seed"] = s + 4;
      }
      miaudit::EvaluationReport report = miaudit::run_experiment(cfg);
      miaudit::emit_report(report, out_dir);
      print_summary(report);
      std::printf("wrote %s/report.json\n", out_dir.c_str());
      return 0;
    }
    if (sweep_cmd->parsed()) {
      auto cfg = miaudit::ExperimentConfig::from_file(config_path);
      auto values = parse_values(values_csv);
      miaudit::SweepResult result = miaudit::sweep(cfg, axis, values);
      std::error_code ec;
      std::filesystem::create_directories(out_dir, ec);
      std::string path = out_dir + "/sweep.csv";
      std::ofstream out(path);
      if (!out) throw miaudit::IoError("cannot write " + path);
      out << miaudit::sweep_csv(result, axis);
      std::printf("sweep: %zu runs, %zu failures -> %s\n", result.runs.size(),
                  result.failures.size(), path.c_str());
      for (const auto& [value, error] : result.failures) {
        std::fprintf(stderr, "failed %s: %s\n", value.dump().c_str(), error.c_str());
      }
      return result.failures.empty() ? 0 : kExitAttack;
    }
    if (score_cmd->parsed()) {
      std::ifstream in(report_path);
      if (!in) throw miaudit::IoError("cannot open " + report_path);
      nlohmann::json j;
      in >> j;
      miaudit::EvaluationReport report = miaudit::report_from_json(j);
      // Verify that stored aggregates match the per-point records.
      bool consistent = true;
      for (const auto& a : report.attacks) {
        // Per-point records run members first (the target train split), then
        // non-members; the stored confusion matrix pins the member count.
        std::size_t members = a.metrics.true_positives + a.metrics.false_negatives;
        std::vector<bool> truth;
        truth.reserve(a.predictions.size());
        for (std::size_t i = 0; i < a.predictions.size(); ++i) truth.push_back(i < members);
        miaudit::ScoreEntry re = miaudit::score(a.predictions, truth);
        if (std::abs(re.accuracy - a.metrics.accuracy) > 1e-12 ||
            re.true_positives != a.metrics.true_positives ||
            re.false_positives != a.metrics.false_positives) {
          consistent = false;
          std::fprintf(stderr, "attack %s: stored accuracy %.6f != recomputed %.6f\n",
                       a.name.c_str(), a.metrics.accuracy, re.accuracy);
        }
      }
      print_summary(report);
      std::printf("aggregates %s per-point records\n", consistent ? "match" : "DIVERGE from");
      return consistent ? 0 : kExitAttack;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  }
  return kExitOther;
}
