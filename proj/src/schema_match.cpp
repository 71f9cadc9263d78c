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

#include "flowetl/schema_match.hpp"

#include "flowetl/errors.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace flowetl {

namespace {

constexpr const char* kSynonymTable =
#include "synonyms.inc"
    ;

const std::unordered_map<std::string, std::vector<std::string>>& synonyms() {
  static const auto table = [] {
    std::unordered_map<std::string, std::vector<std::string>> out;
    std::istringstream in(kSynonymTable);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line.front() == '#') continue;
      std::istringstream words(line);
      std::string alias;
      if (!(words >> alias)) continue;
      std::vector<std::string> canonical;
      for (std::string w; words >> w;) canonical.push_back(w);
      if (!canonical.empty()) out[alias] = std::move(canonical);
    }
    return out;
  }();
  return table;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::vector<std::string> raw_tokens(std::string_view name) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(lower(cur));
    cur.clear();
  };
  for (std::size_t i = 0; i < name.size(); ++i) {
    const auto c = static_cast<unsigned char>(name[i]);
    if (!std::isalnum(c)) {
      flush();
      continue;
    }
    if (!cur.empty()) {
      const auto prev = static_cast<unsigned char>(cur.back());
      const bool next_lower = i + 1 < name.size() && std::islower(static_cast<unsigned char>(name[i + 1]));
      const bool boundary = (std::islower(prev) && std::isupper(c)) ||
                            (std::isupper(prev) && std::isupper(c) && next_lower) ||
                            (std::isdigit(prev) != 0) != (std::isdigit(c) != 0);
      if (boundary) flush();
    }
    cur.push_back(static_cast<char>(c));
  }
  flush();
  return out;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

}  // namespace

const Correspondence* SchemaMap::find_target(std::string_view target) const {
  for (const auto& c : correspondences)
    if (c.target == target) return &c;
  return nullptr;
}

nlohmann::ordered_json schema_map_to_json(const SchemaMap& map) {
  nlohmann::ordered_json out;
  out["correspondences"] = nlohmann::ordered_json::array();
  for (const auto& c : map.correspondences)
    out["correspondences"].push_back({{"sources", c.sources}, {"target", c.target}});
  out["unmapped_sources"] = map.unmapped_sources;
  out["unmapped_targets"] = map.unmapped_targets;
  return out;
}

SchemaMap schema_map_from_json(const nlohmann::ordered_json& json) {
  SchemaMap map;
  try {
    for (const auto& c : json.at("correspondences")) {
      Correspondence corr;
      corr.sources = c.at("sources").get<std::vector<std::string>>();
      corr.target = c.at("target").get<std::string>();
      map.correspondences.push_back(std::move(corr));
    }
    if (json.contains("unmapped_sources"))
      map.unmapped_sources = json["unmapped_sources"].get<std::vector<std::string>>();
    if (json.contains("unmapped_targets"))
      map.unmapped_targets = json["unmapped_targets"].get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ContractViolation(std::string("malformed schema map: ") + e.what());
  }
  return map;
}

std::vector<std::string> name_tokens(std::string_view name) {
  std::vector<std::string> out;
  for (const auto& t : raw_tokens(name)) {
    auto it = synonyms().find(t);
    if (it == synonyms().end()) {
      out.push_back(t);
    } else {
      out.insert(out.end(), it->second.begin(), it->second.end());
    }
  }
  return out;
}

double syntactic_similarity(std::string_view a, std::string_view b) {
  const std::string la = lower(a);
  const std::string lb = lower(b);
  const std::size_t longest = std::max(la.size(), lb.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(edit_distance(la, lb)) / static_cast<double>(longest);
}

double semantic_similarity(std::string_view a, std::string_view b) {
  const auto ta = name_tokens(a);
  const auto tb = name_tokens(b);
  const std::set<std::string> sa(ta.begin(), ta.end());
  const std::set<std::string> sb(tb.begin(), tb.end());
  std::set<std::string> uni = sa;
  uni.insert(sb.begin(), sb.end());
  if (uni.empty()) return lower(a) == lower(b) ? 1.0 : 0.0;
  std::size_t inter = 0;
  for (const auto& t : sa) inter += sb.count(t);
  return static_cast<double>(inter) / static_cast<double>(uni.size());
}

bool types_compatible(ColumnType a, ColumnType b) {
  auto scalar_only = [](ColumnType t) { return t == ColumnType::Number || t == ColumnType::Boolean; };
  if (a == ColumnType::Complex && scalar_only(b)) return false;
  if (b == ColumnType::Complex && scalar_only(a)) return false;
  return true;
}

double similarity(const ColumnRef& x, const ColumnRef& y) {
  double w = 0.5 * (syntactic_similarity(x.name, y.name) + semantic_similarity(x.name, y.name));
  if (!types_compatible(x.type, y.type)) w *= 0.5;
  return std::clamp(w, 0.0, 1.0);
}

BipartiteGraph build_bipartite(const ColumnSchema& source, const ColumnSchema& target) {
  if (source.empty() || target.empty()) throw ContractViolation("schema matching needs two non-empty schemas");
  BipartiteGraph g;
  for (const auto& [n, t] : source.entries()) g.sources.push_back({n, t});
  for (const auto& [n, t] : target.entries()) g.targets.push_back({n, t});
  g.weights.reserve(g.sources.size() * g.targets.size());
  for (const auto& x : g.sources)
    for (const auto& y : g.targets) g.weights.push_back(similarity(x, y));
  return g;
}

std::vector<int> stable_assignment(const BipartiteGraph& g, double floor) {
  const std::size_t ns = g.sources.size();
  const std::size_t nt = g.targets.size();

  // Preference lists: weight descending, then name ascending.
  std::vector<std::vector<std::size_t>> prefs(ns);
  for (std::size_t i = 0; i < ns; ++i) {
    for (std::size_t j = 0; j < nt; ++j)
      if (g.weight(i, j) >= floor) prefs[i].push_back(j);
    std::stable_sort(prefs[i].begin(), prefs[i].end(), [&](std::size_t a, std::size_t b) {
      if (g.weight(i, a) != g.weight(i, b)) return g.weight(i, a) > g.weight(i, b);
      return g.targets[a].name < g.targets[b].name;
    });
  }
  auto target_prefers = [&](std::size_t j, std::size_t a, std::size_t b) {
    if (g.weight(a, j) != g.weight(b, j)) return g.weight(a, j) > g.weight(b, j);
    return g.sources[a].name < g.sources[b].name;
  };

  std::vector<int> source_match(ns, -1);
  std::vector<int> target_match(nt, -1);
  std::vector<std::size_t> next(ns, 0);
  std::deque<std::size_t> free;
  for (std::size_t i = 0; i < ns; ++i) free.push_back(i);
  while (!free.empty()) {
    const std::size_t i = free.front();
    free.pop_front();
    if (next[i] >= prefs[i].size()) continue;
    const std::size_t j = prefs[i][next[i]++];
    if (target_match[j] < 0) {
      target_match[j] = static_cast<int>(i);
      source_match[i] = static_cast<int>(j);
    } else {
      const auto current = static_cast<std::size_t>(target_match[j]);
      if (target_prefers(j, i, current)) {
        source_match[current] = -1;
        free.push_back(current);
        target_match[j] = static_cast<int>(i);
        source_match[i] = static_cast<int>(j);
      } else {
        free.push_back(i);
      }
    }
  }
  return source_match;
}

SchemaMap match_algorithmic(const BipartiteGraph& g, const MatchThresholds& thresholds) {
  const std::size_t ns = g.sources.size();
  const std::size_t nt = g.targets.size();
  const auto assignment = stable_assignment(g, thresholds.floor);

  // Sources feeding each target, as source indices.
  std::vector<std::set<std::size_t>> feeds(nt);
  std::vector<bool> source_used(ns, false);
  for (std::size_t i = 0; i < ns; ++i) {
    if (assignment[i] >= 0) {
      feeds[static_cast<std::size_t>(assignment[i])].insert(i);
      source_used[i] = true;
    }
  }

  auto best_target = [&](std::size_t i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < nt; ++j) {
      const double w = g.weight(i, j), bw = g.weight(i, best);
      if (w > bw || (w == bw && g.targets[j].name < g.targets[best].name)) best = j;
    }
    return best;
  };
  auto best_source = [&](std::size_t j) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < ns; ++i) {
      const double w = g.weight(i, j), bw = g.weight(best, j);
      if (w > bw || (w == bw && g.sources[i].name < g.sources[best].name)) best = i;
    }
    return best;
  };

  // n:1: unmatched sources join their best target.
  for (std::size_t i = 0; i < ns; ++i) {
    if (source_used[i]) continue;
    const std::size_t j = best_target(i);
    if (g.weight(i, j) >= thresholds.attach && g.weight(i, j) >= thresholds.floor) {
      feeds[j].insert(i);
      source_used[i] = true;
    }
  }
  // 1:n: targets still without a feed claim their best source.
  for (std::size_t j = 0; j < nt; ++j) {
    if (!feeds[j].empty()) continue;
    const std::size_t i = best_source(j);
    if (g.weight(i, j) >= thresholds.attach && g.weight(i, j) >= thresholds.floor) {
      feeds[j].insert(i);
      source_used[i] = true;
    }
  }

  SchemaMap map;
  for (std::size_t j = 0; j < nt; ++j) {
    if (feeds[j].empty()) {
      map.unmapped_targets.push_back(g.targets[j].name);
      continue;
    }
    Correspondence c;
    c.target = g.targets[j].name;
    for (auto i : feeds[j]) c.sources.push_back(g.sources[i].name);
    map.correspondences.push_back(std::move(c));
  }
  for (std::size_t i = 0; i < ns; ++i)
    if (!source_used[i]) map.unmapped_sources.push_back(g.sources[i].name);
  return map;
}

std::vector<std::string> validate_schema_map(const SchemaMap& map, const ColumnSchema& source,
                                             const ColumnSchema& target) {
  std::vector<std::string> violations;
  std::set<std::string> targets_seen;
  for (const auto& c : map.correspondences) {
    if (!target.contains(c.target)) violations.push_back("unknown target column '" + c.target + "'");
    if (!targets_seen.insert(c.target).second) violations.push_back("target mapped twice: '" + c.target + "'");
    if (c.sources.empty()) violations.push_back("target '" + c.target + "' has no source columns");
    std::set<std::string> sources_seen;
    for (const auto& s : c.sources) {
      if (!source.contains(s)) violations.push_back("unknown source column '" + s + "'");
      if (!sources_seen.insert(s).second)
        violations.push_back("source '" + s + "' listed twice for target '" + c.target + "'");
    }
  }
  return violations;
}

void complete_unmapped(SchemaMap& map, const ColumnSchema& source, const ColumnSchema& target) {
  std::set<std::string> used_sources, used_targets;
  for (const auto& c : map.correspondences) {
    used_targets.insert(c.target);
    used_sources.insert(c.sources.begin(), c.sources.end());
  }
  map.unmapped_sources.clear();
  map.unmapped_targets.clear();
  for (const auto& [n, t] : source.entries())
    if (!used_sources.count(n)) map.unmapped_sources.push_back(n);
  for (const auto& [n, t] : target.entries())
    if (!used_targets.count(n)) map.unmapped_targets.push_back(n);
}

std::vector<std::string> default_match_rules() {
  return {
      "Map each target column to the source column or columns whose values it is derived from.",
      "Use column names and types only; values may change during later transformation.",
      "A target column may combine several source columns (many-to-one).",
      "A source column may feed several target columns (one-to-many).",
      "Every target column appears in at most one correspondence.",
      "Only use column names that appear in the given schemas.",
      "Respond with JSON: {\"correspondences\": [{\"sources\": [...], \"target\": \"...\"}]}.",
  };
}

SchemaMap match_via_provider(const ColumnSchema& source, const ColumnSchema& target, Provider& provider,
                             Diagnostics& diagnostics, const MatchThresholds& thresholds) {
  nlohmann::ordered_json request;
  request["source_schema"] = schema_to_json(source);
  request["target_schema"] = schema_to_json(target);
  request["rules"] = default_match_rules();

  auto fallback = [&](const std::string& reason) {
    diagnostics.warn("schema match provider rejected (" + reason + "); using algorithmic matcher");
    return match_algorithmic(build_bipartite(source, target), thresholds);
  };

  const ProviderResult result = provider.request("match", request);
  if (!result.ok) return fallback(result.error);

  SchemaMap map;
  try {
    map = schema_map_from_json(result.body);
  } catch (const ContractViolation& e) {
    return fallback(e.what());
  }
  const auto violations = validate_schema_map(map, source, target);
  if (!violations.empty()) return fallback(violations.front());

  // Keep correspondences in target-schema order.
  std::stable_sort(map.correspondences.begin(), map.correspondences.end(),
                   [&](const Correspondence& a, const Correspondence& b) {
                     const auto& e = target.entries();
                     auto pos = [&](const std::string& n) {
                       return std::find_if(e.begin(), e.end(), [&](const auto& p) { return p.first == n; }) - e.begin();
                     };
                     return pos(a.target) < pos(b.target);
                   });
  complete_unmapped(map, source, target);
  return map;
}

}  // namespace flowetl
