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

#pragma once

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <span>
#include <sstream>
#include <string>

#include "json.hpp"
#include "sabft/checker.hpp"
#include "sabft/config.hpp"
#include "sabft/error.hpp"
#include "sabft/fault.hpp"

// JSON views of configurations, round results and campaign reports.

namespace sabft {

using json = nlohmann::ordered_json;

inline json to_json(const ArrayConfig& c) {
  json j = {{"R", c.rows},
            {"C", c.cols},
            {"pattern", c.pattern.str()},
            {"input_width", c.input_width},
            {"ic_width", c.ic_width},
            {"oc_width", c.oc_width},
            {"col_out_width", c.col_out_width},
            {"cksum_width", c.cksum_width}};
  if (c.slots > 0) j["slots"] = c.slots;
  return j;
}

/// Missing keys keep their defaults; unknown keys are rejected.
[[nodiscard]] inline ArrayConfig array_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ArrayConfig c;
  for (const auto& [key, value] : j.items()) {
    auto as_int = [&] {
      if (!value.is_number_integer()) throw ConfigError("config key '" + key + "' must be an integer");
      return value.get<int>();
    };
    if (key == "R") c.rows = as_int();
    else if (key == "C") c.cols = as_int();
    else if (key == "pattern") {
      if (!value.is_string()) throw ConfigError("config key 'pattern' must be a string like \"2:4\"");
      try {
        c.pattern = SparsityPattern::parse(value.get<std::string>());
      } catch (const ParseError& e) {
        throw ConfigError(e.what());
      }
    } else if (key == "input_width") c.input_width = as_int();
    else if (key == "ic_width") c.ic_width = as_int();
    else if (key == "oc_width") c.oc_width = as_int();
    else if (key == "col_out_width") c.col_out_width = as_int();
    else if (key == "cksum_width") c.cksum_width = as_int();
    else if (key == "slots") c.slots = as_int();
    else throw ConfigError("unknown config key '" + key + "'");
  }
  c.validate();
  return c;
}

[[nodiscard]] inline ArrayConfig load_array_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return array_config_from_json(j);
}

inline json to_json(const ChecksumRoundResult& r) {
  return {{"round", r.round}, {"actual", r.actual}, {"predicted", r.predicted}, {"flag", r.flag}};
}

inline json rounds_json(std::span<const ChecksumRoundResult> rounds) {
  json arr = json::array();
  for (const auto& r : rounds) arr.push_back(to_json(r));
  return arr;
}

inline json to_json(const FaultSpec& f, const RegisterMap& regs) {
  return {{"cycle", f.cycle}, {"register", f.reg.value}, {"name", regs.at(f.reg).name()}, {"bit", f.bit}};
}

/// Percentages are rounded to 1e-4 so reports print identically everywhere.
[[nodiscard]] inline double round_pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return std::strtod(buf, nullptr);
}

inline json config_echo(const CampaignConfig& cfg, bool paper_compat) {
  json j = {{"array", to_json(cfg.array)},
            {"campaigns", cfg.campaigns},
            {"faults", {{"min", cfg.faults_min}, {"max", cfg.faults_max}}},
            {"seed", cfg.seed},
            {"paper_compat", paper_compat}};
  if (const auto* s = std::get_if<SyntheticWorkload>(&cfg.workload)) {
    j["workload"] = {{"kind", "synthetic"},
                     {"a_rows", {s->a_rows_min, s->a_rows_max}},
                     {"k", s->k},
                     {"cols", s->cols},
                     {"values", {s->value_min, s->value_max}}};
  } else {
    const auto& imp = std::get<ImportedWorkload>(cfg.workload);
    j["workload"] = {{"kind", "imported"},
                     {"a", {imp.a.rows(), imp.a.cols()}},
                     {"w", {imp.w.rows(), imp.w.cols()}}};
  }
  return j;
}

/// Campaign report: config echo, counts, category percentages, and the
/// per-campaign record (faults, per-round flags, category).
inline json campaign_report(const CampaignConfig& cfg, std::span<const CampaignOutcome> outcomes,
                            const StatsTable& stats, const RegisterMap& regs, bool paper_compat) {
  json j;
  j["config_echo"] = config_echo(cfg, paper_compat);
  json totals = {{"campaigns", stats.total}};
  for (auto c : kCategories) totals[category_key(c)] = stats.count(c);
  j["totals"] = totals;
  json cats;
  for (auto c : kCategories) cats[category_key(c)] = round_pct(stats.percent(c));
  j["categories"] = cats;
  if (paper_compat) {
    json compat;
    for (auto c : kCategories)
      if (c != Category::Benign) compat[category_key(c)] = round_pct(stats.compat_percent(c));
    j["paper_compat"] = compat;
  }
  json per = json::array();
  for (const auto& o : outcomes) {
    json faults = json::array();
    for (const auto& f : o.faults) faults.push_back(to_json(f, regs));
    json flags = json::array();
    for (bool b : o.flags) flags.push_back(b);
    per.push_back({{"index", o.index},
                   {"faults", faults},
                   {"flags", flags},
                   {"output_corrupted", o.output_corrupted},
                   {"category", category_key(o.category)}});
  }
  j["per_campaign"] = per;
  return j;
}

/// Text table with one row per category, laid out like a fault-detection
/// summary table.
inline void print_stats_table(std::ostream& out, const StatsTable& t, bool paper_compat) {
  out << "Block sparsity " << t.pattern << ", faults " << t.regime << ", " << t.total << " campaigns\n";
  out << std::fixed << std::setprecision(2);
  for (auto c : kCategories) {
    if (paper_compat && c == Category::Benign) continue;
    const double pct = paper_compat ? t.compat_percent(c) : t.percent(c);
    out << "  " << std::left << std::setw(16) << category_label(c) << std::right << std::setw(7) << pct << "%\n";
  }
  out.unsetf(std::ios::floatfield);
}

}  // namespace sabft
