// Copyright 2026 The FlowETL Authors
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

#include "flowetl/errors.hpp"
#include "flowetl/evalkit.hpp"
#include "flowetl/ir.hpp"
#include "flowetl/planner.hpp"
#include "flowetl/quality.hpp"
#include "flowetl/runtime.hpp"
#include "flowetl/schema.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using ojson = nlohmann::ordered_json;

ojson read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw flowetl::Error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  auto j = ojson::parse(ss.str(), nullptr, false);
  if (j.is_discarded()) throw flowetl::TranslationError(path + " is not valid JSON");
  return j;
}

flowetl::ProviderMode parse_mode(const std::string& s) {
  if (s == "algorithmic") return flowetl::ProviderMode::Algorithmic;
  if (s == "remote") return flowetl::ProviderMode::Remote;
  throw flowetl::ContractViolation("unknown provider '" + s + "'");
}

void print_quality(const std::string& label, const flowetl::QualityIndicators& q) {
  std::cout << label << ": rows " << q.row_count << ", missing " << q.missing_ratio << ", duplicates "
            << q.duplicate_ratio << ", outliers " << q.outlier_ratio << ", DQS " << q.dqs << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FlowETL: example-driven extract, transform, load"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Plan and execute a pipeline for one source/target pair");
  std::string source, target, out_dir, config_path, provider = "algorithmic";
  std::uint64_t seed = 0;
  std::size_t sample_floor = 50, workers = 1;
  double sample_pct = 0.05;
  auto* o_source = run->add_option("--source", source, "Source file (CSV or JSON)");
  auto* o_target = run->add_option("--target", target, "Target example file");
  auto* o_out = run->add_option("--out", out_dir, "Run directory");
  auto* o_seed = run->add_option("--seed", seed, "Sampling seed");
  auto* o_floor = run->add_option("--sample-floor", sample_floor, "Minimum sample rows");
  auto* o_pct = run->add_option("--sample-pct", sample_pct, "Sample share of source rows")
                    ->check(CLI::Range(0.0, 1.0));
  auto* o_provider = run->add_option("--provider", provider, "algorithmic or remote")
                         ->check(CLI::IsMember({"algorithmic", "remote"}));
  auto* o_workers = run->add_option("--workers", workers, "Transform shards")->check(CLI::PositiveNumber);
  run->add_option("--config", config_path, "JSON config file; flags override it")->check(CLI::ExistingFile);

  // report
  auto* report = app.add_subcommand("report", "Print the report of a finished run");
  std::string run_dir;
  bool report_json = false;
  report->add_option("run-dir", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  report->add_flag("--json", report_json, "Print the JSON document");

  // pollute
  auto* pollute = app.add_subcommand("pollute", "Inject missing cells, duplicate rows and outliers");
  std::string pollute_in, pollute_out;
  flowetl::PollutionSpec spec;
  pollute->add_option("--in", pollute_in, "Clean input file")->required()->check(CLI::ExistingFile);
  pollute->add_option("--out", pollute_out, "Polluted output file")->required();
  pollute->add_option("--missing", spec.missing, "Missing cell share")->check(CLI::Range(0.0, 0.99));
  pollute->add_option("--dups", spec.duplicates, "Duplicate row share")->check(CLI::Range(0.0, 0.99));
  pollute->add_option("--outliers", spec.outliers, "Outlier cell share")->check(CLI::Range(0.0, 0.99));
  pollute->add_option("--seed", spec.seed, "Seed");

  // eval
  auto* eval = app.add_subcommand("eval", "Score a plan against a ground-truth plan");
  std::string plan_path, gt_path;
  eval->add_option("--plan", plan_path, "plan.json of a run")->required()->check(CLI::ExistingFile);
  eval->add_option("--gt", gt_path, "Ground-truth plan")->required()->check(CLI::ExistingFile);

  // bench
  auto* bench = app.add_subcommand("bench", "Run every corpus pair and tabulate the results");
  std::string corpus_dir, bench_out;
  flowetl::BenchmarkConfig bench_config;
  std::string bench_provider = "algorithmic";
  bench->add_option("--corpus", corpus_dir, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  bench->add_option("--out", bench_out, "Results directory")->required();
  bench->add_option("--seed", bench_config.seed, "Sampling seed");
  bench->add_option("--workers", bench_config.workers, "Transform shards")->check(CLI::PositiveNumber);
  bench->add_option("--provider", bench_provider, "algorithmic or remote")
      ->check(CLI::IsMember({"algorithmic", "remote"}));

  // corpus
  auto* corpus = app.add_subcommand("corpus", "Generate the synthetic evaluation corpus");
  std::string corpus_out;
  flowetl::CorpusSpec corpus_spec;
  corpus->add_option("--out", corpus_out, "Output directory")->required();
  corpus->add_option("--seed", corpus_spec.seed, "Seed");
  corpus->add_option("--sizes", corpus_spec.sizes, "Row counts, cycled over the domains");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      flowetl::PipelineConfig config;
      if (!config_path.empty()) flowetl::apply_config_file(config, config_path);
      if (o_source->count()) config.source = source;
      if (o_target->count()) config.target = target;
      if (o_out->count()) config.out_dir = out_dir;
      if (o_seed->count()) config.seed = seed;
      if (o_floor->count()) config.sampling.floor = sample_floor;
      if (o_pct->count()) config.sampling.pct = sample_pct;
      if (o_provider->count()) config.mode = parse_mode(provider);
      if (o_workers->count()) config.workers = workers;
      if (config.source.empty() || config.target.empty() || config.out_dir.empty()) {
        std::cerr << "run: --source, --target and --out are required (flags or config)\n";
        return 2;
      }
      const auto result = flowetl::run_pipeline(config);
      std::cout << result.report.text;
      if (!result.output_path.empty()) std::cout << "output: " << result.output_path << "\n";
      return result.exit_code;
    }
    if (*report) {
      const auto r = flowetl::load_report(run_dir);
      std::cout << (report_json ? r.json.dump(2) + "\n" : r.text);
      return r.json["succeeded"].get<bool>() ? 0 : 1;
    }
    if (*pollute) {
      const auto in = flowetl::load_file(pollute_in);
      flowetl::Diagnostics diagnostics;
      const auto polluted = flowetl::pollute(in.ir, spec, &diagnostics);
      flowetl::write_file(pollute_out, polluted, in.key, flowetl::format_for_path(pollute_out));
      for (const auto& w : diagnostics.warnings()) std::cerr << "warning: " << w << "\n";
      const auto schema = flowetl::infer_schema(polluted);
      print_quality("polluted", flowetl::dqs(polluted, schema));
      return 0;
    }
    if (*eval) {
      const auto ops = flowetl::plan_ops(flowetl::payload_from_json(read_json(plan_path)));
      const auto score = flowetl::plan_eval(ops, flowetl::gt_from_json(read_json(gt_path)));
      std::cout << "PlanEval " << score.value << " (" << score.s << " / " << score.max_s << "; correct "
                << score.correct << ", partial " << score.partial << ", hallucinated " << score.hallucinated
                << ")\n";
      return 0;
    }
    if (*bench) {
      bench_config.mode = parse_mode(bench_provider);
      const auto rows = flowetl::benchmark(corpus_dir, bench_out, bench_config);
      std::cout << flowetl::benchmark_markdown(rows);
      for (const auto& r : rows)
        if (!r.ok) return 1;
      return 0;
    }
    if (*corpus) {
      const auto pairs = flowetl::generate_corpus(corpus_spec);
      flowetl::write_corpus(pairs, corpus_out);
      for (const auto& p : pairs) std::cout << p.name << ": " << p.polluted.row_count() << " rows\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
