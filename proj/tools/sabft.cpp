/*
 * Copyright 2026 The sparse-abft Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// sabft: prune/pack weights, run one checked multiplication, or run fault
// campaigns on the simulated sparse tensor array.
//
// Exit codes: 0 ok / clean, 1 a checksum round flagged, 2 parse, usage or
// config error, 3 I/O error, 4 shape error.

#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sabft/sabft.hpp"

namespace {

using namespace sabft;

enum Exit : int { kClean = 0, kFlagged = 1, kParse = 2, kIo = 3, kShape = 4 };

/// "lo..hi" or a single number.
std::pair<std::size_t, std::size_t> parse_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      const auto v = std::stoull(text);
      return {v, v};
    }
    return {std::stoull(text.substr(0, dots)), std::stoull(text.substr(dots + 2))};
  } catch (const std::exception&) {
    throw ParseError("bad range '" + text + "', expected lo..hi");
  }
}

/// "cycle:register:bit"; register is a name such as tpe[0][1].psum or an id.
FaultSpec parse_inject(const std::string& text, const RegisterMap& regs) {
  const auto first = text.find(':');
  const auto last = text.rfind(':');
  if (first == std::string::npos || first == last) throw ParseError("--inject expects cycle:register:bit");
  FaultSpec f;
  try {
    f.cycle = std::stoull(text.substr(0, first));
    f.bit = std::stoi(text.substr(last + 1));
  } catch (const std::exception&) {
    throw ParseError("bad --inject '" + text + "'");
  }
  const auto reg = regs.find(text.substr(first + 1, last - first - 1));
  if (!reg) throw ParseError("unknown register in --inject '" + text + "'");
  f.reg = *reg;
  if (f.bit < 0 || f.bit >= regs.at(f.reg).width) throw ParseError("bit out of range in --inject '" + text + "'");
  return f;
}

int cmd_prune(const std::string& pattern_text, const std::string& in_path, const std::string& out_path) {
  const auto pattern = SparsityPattern::parse(pattern_text);
  const auto dense = load_dense(in_path);
  const auto packed = prune_magnitude(dense, pattern);
  write_file(out_path, [&](std::ostream& out) { write_packed(out, packed); });
  const auto before = static_cast<std::size_t>(
      std::count_if(dense.data().begin(), dense.data().end(), [](std::int64_t v) { return v != 0; }));
  std::cout << "kept " << packed.nonzeros() << " zeroed " << before - packed.nonzeros() << '\n';
  return kClean;
}

struct RunArgs {
  std::string config, a, w, out, report, trace;
  std::vector<std::string> inject, watch;
};

int cmd_run(const RunArgs& args) {
  const auto cfg = load_array_config(args.config);
  const auto a = load_dense(args.a);
  const auto w = load_packed(args.w);
  if (!a.fits_width(cfg.input_width) || !unpack(w).fits_width(cfg.input_width))
    throw ParseError("operands exceed the " + std::to_string(cfg.input_width) + "-bit input width");
  if (a.cols() != w.rows())
    throw ShapeError("A is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " but W has " +
                     std::to_string(w.rows()) + " rows");
  if (a.rows() == 0 || w.cols() == 0) throw ShapeError("empty operands");
  if (w.pattern().m != cfg.pattern.m || w.pattern().n > cfg.pattern.n)
    throw ShapeError("weights are " + w.pattern().str() + " but the array runs " + cfg.pattern.str());

  SimState sim(cfg);
  std::vector<FaultSpec> faults;
  for (const auto& spec : args.inject) faults.push_back(parse_inject(spec, sim.registers()));

  std::unique_ptr<std::ofstream> trace;
  if (!args.trace.empty()) {
    trace = std::make_unique<std::ofstream>(args.trace);
    if (!*trace) throw IoError("cannot write " + args.trace);
    std::vector<RegisterId> watch;
    for (const auto& name : args.watch) {
      const auto id = sim.registers().find(name);
      if (!id) throw ParseError("unknown register in --watch: " + name);
      watch.push_back(*id);
    }
    sim.set_trace(trace.get(), std::move(watch));
  }

  const auto res = run_matmul(sim, a, w, faults);
  write_file(args.out, [&](std::ostream& out) { write_dense(out, res.product); });

  const bool flagged = std::any_of(res.rounds.begin(), res.rounds.end(), [](const auto& r) { return r.flag; });
  json faults_json = json::array();
  for (const auto& f : faults) faults_json.push_back(to_json(f, sim.registers()));
  json report = {{"config_echo", to_json(cfg)},
                 {"output", args.out},
                 {"cycles", res.cycles},
                 {"injected", faults_json},
                 {"rounds", rounds_json(res.rounds)},
                 {"verdict", flagged ? "flagged" : "clean"}};
  write_file(args.report, [&](std::ostream& out) { out << report.dump(2) << '\n'; });
  std::cout << (flagged ? "flagged" : "clean") << ": " << res.rounds.size() << " checksum round(s), " << res.cycles
            << " cycles\n";
  return flagged ? kFlagged : kClean;
}

struct CampaignArgs {
  std::string config, faults = "1..1", sparsity, report, rows = "128..512", a, w;
  std::size_t campaigns = 1, k = 64, cols = 32;
  std::uint64_t seed = 1;
  bool paper_compat = false;
};

int cmd_campaign(const CampaignArgs& args) {
  CampaignConfig cfg;
  cfg.array = args.config.empty() ? ArrayConfig{} : load_array_config(args.config);
  if (!args.sparsity.empty()) {
    try {
      cfg.array.pattern = SparsityPattern::parse(args.sparsity);
    } catch (const ParseError& e) {
      throw ConfigError(e.what());
    }
  }
  std::tie(cfg.faults_min, cfg.faults_max) = parse_range(args.faults);
  cfg.campaigns = args.campaigns;
  cfg.seed = args.seed;
  if (!args.a.empty() || !args.w.empty()) {
    if (args.a.empty() || args.w.empty()) throw ConfigError("--a and --w must be given together");
    cfg.workload = ImportedWorkload{load_dense(args.a), load_dense(args.w)};
  } else {
    const auto [lo, hi] = parse_range(args.rows);
    cfg.workload = SyntheticWorkload{lo, hi, args.k, args.cols};
  }
  cfg.validate();

  const auto outcomes = run_campaigns(cfg);
  const std::string regime = cfg.faults_min == cfg.faults_max
                                 ? std::to_string(cfg.faults_min)
                                 : std::to_string(cfg.faults_min) + "-" + std::to_string(cfg.faults_max);
  const auto stats = aggregate(outcomes, cfg.array.pattern.str(), regime);
  const SimState probe(cfg.array);
  const auto report = campaign_report(cfg, outcomes, stats, probe.registers(), args.paper_compat);
  write_file(args.report, [&](std::ostream& out) { out << report.dump(2) << '\n'; });
  print_stats_table(std::cout, stats, args.paper_compat);
  return kClean;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse tensor array simulator with ABFT checking and fault injection"};
  app.require_subcommand(1);

  std::string pattern, prune_in, prune_out;
  auto* prune = app.add_subcommand("prune", "Magnitude-prune a dense matrix to N:M and write packed form");
  prune->add_option("--pattern", pattern, "n:m")->required();
  prune->add_option("--in", prune_in, "dense matrix file")->required();
  prune->add_option("--out", prune_out, "packed output file")->required();

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run one checked multiplication");
  run->add_option("--config", run_args.config, "array config JSON")->required();
  run->add_option("--a", run_args.a, "dense input matrix")->required();
  run->add_option("--w", run_args.w, "packed weight matrix")->required();
  run->add_option("--out", run_args.out, "output matrix file")->required();
  run->add_option("--report", run_args.report, "run report JSON")->required();
  run->add_option("--inject", run_args.inject, "cycle:register:bit (repeatable)");
  run->add_option("--trace", run_args.trace, "per-cycle trace CSV");
  run->add_option("--watch", run_args.watch, "registers to trace")->delimiter(',');

  CampaignArgs camp;
  auto* campaign = app.add_subcommand("campaign", "Run seeded fault-injection campaigns");
  campaign->add_option("--config", camp.config, "array config JSON (defaults to the 8x32 array)");
  campaign->add_option("--campaigns", camp.campaigns, "number of campaigns")->required()->check(CLI::PositiveNumber);
  campaign->add_option("--faults", camp.faults, "faults per campaign, lo..hi");
  campaign->add_option("--sparsity", camp.sparsity, "2:4 or 1:4 (overrides the config pattern)");
  campaign->add_option("--seed", camp.seed, "master seed");
  campaign->add_option("--report", camp.report, "stats report JSON")->required();
  campaign->add_flag("--paper-compat", camp.paper_compat, "fold Benign into Silent");
  campaign->add_option("--rows", camp.rows, "synthetic A rows, lo..hi");
  campaign->add_option("--k", camp.k, "synthetic inner dimension");
  campaign->add_option("--cols", camp.cols, "synthetic output columns");
  campaign->add_option("--a", camp.a, "import dense A instead of synthetic data");
  campaign->add_option("--w", camp.w, "import dense W (pruned to the campaign pattern)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kClean : kParse;
  }

  try {
    if (*prune) return cmd_prune(pattern, prune_in, prune_out);
    if (*run) return cmd_run(run_args);
    if (*campaign) return cmd_campaign(camp);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const ShapeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kShape;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kParse;
  }
  return kParse;
}
