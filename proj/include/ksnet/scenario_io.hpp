#pragma once

// Plain-text scenario files.
//
//   [graph]
//   vertex <id>
//   edge <id> <tail> <head> length=<r>
//   [params]
//   <edge id | *> alpha=<r> beta=<r> gamma=<r> delta=<r> chi=<r>
//   [initial]
//   <edge id | *> u="<expr in x>" c="<expr in x>"
//   [boundary]
//   <vertex id> influx_u="<expr in w>" influx_c="<expr in w>"
//   [discretization]
//   h=<r> tau=<r> t_end=<r>
//   [output]
//   stride=<int>
//
// '#' starts a comment outside quotes. Lines with '*' set defaults that edge
// lines override key by key, regardless of order. Reals may be written as
// constant expressions such as 2^-7.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ksnet/errors.hpp"
#include "ksnet/expr.hpp"
#include "ksnet/graph.hpp"
#include "ksnet/stepping.hpp"

namespace ksnet {

namespace scenario_detail {

struct Token {
  std::string key;    // empty for bare words
  std::string value;  // word text, or the value of key=value
};

struct Line {
  std::size_t number = 0;
  std::vector<Token> tokens;
};

inline std::vector<Token> tokenize(std::string_view text, std::size_t line) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    if (i >= text.size() || text[i] == '#') break;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i]) && text[i] != '=' && text[i] != '"' && text[i] != '#') ++i;
    std::string word(text.substr(start, i - start));
    if (i < text.size() && text[i] == '"') throw ScenarioSyntaxError("unexpected quote", line);
    if (i < text.size() && text[i] == '=') {
      if (word.empty()) throw ScenarioSyntaxError("missing key before '='", line);
      ++i;
      std::string value;
      if (i < text.size() && text[i] == '"') {
        std::size_t close = text.find('"', i + 1);
        if (close == std::string_view::npos) throw ScenarioSyntaxError("unterminated quoted value", line);
        value = std::string(text.substr(i + 1, close - i - 1));
        i = close + 1;
      } else {
        std::size_t vstart = i;
        while (i < text.size() && !is_space(text[i]) && text[i] != '#') ++i;
        value = std::string(text.substr(vstart, i - vstart));
        if (value.empty()) throw ScenarioSyntaxError("missing value for '" + word + "'", line);
        if (value.find('"') != std::string::npos || value.find('=') != std::string::npos)
          throw ScenarioSyntaxError("malformed value for '" + word + "'", line);
      }
      out.push_back({word, value});
    } else {
      out.push_back({"", word});
    }
  }
  return out;
}

inline double parse_real(const std::string& text, std::size_t line) {
  try {
    return Expression::parse(text, "").eval(0.0);
  } catch (const Error& e) {
    throw ScenarioSyntaxError("invalid number '" + text + "': " + e.what(), line);
  }
}

inline Expression parse_expr(const std::string& text, std::string_view variable, std::size_t line) {
  try {
    return Expression::parse(text, variable);
  } catch (const Error& e) {
    throw ScenarioSyntaxError("invalid expression '" + text + "': " + e.what(), line);
  }
}

inline std::string format_real(double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

}  // namespace scenario_detail

inline Scenario parse_scenario_text(std::string_view text) {
  using namespace scenario_detail;
  std::map<std::string, std::vector<Line>> sections;
  const std::vector<std::string> known{"graph", "params", "initial", "boundary", "discretization", "output"};
  std::string current;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(pos, end - pos);
    pos = end + 1;
    ++number;
    std::size_t first = raw.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || raw[first] == '#') {
      if (end == text.size()) break;
      continue;
    }
    if (raw[first] == '[') {
      std::size_t close = raw.find(']', first);
      if (close == std::string_view::npos) throw ScenarioSyntaxError("unterminated section header", number);
      std::string rest(raw.substr(close + 1));
      if (rest.find_first_not_of(" \t\r") != std::string::npos && rest[rest.find_first_not_of(" \t\r")] != '#')
        throw ScenarioSyntaxError("trailing text after section header", number);
      current = std::string(raw.substr(first + 1, close - first - 1));
      if (std::find(known.begin(), known.end(), current) == known.end())
        throw ScenarioSyntaxError("unknown section [" + current + "]", number);
      if (sections.count(current)) throw ScenarioSyntaxError("duplicate section [" + current + "]", number);
      sections[current];
    } else {
      if (current.empty()) throw ScenarioSyntaxError("content before the first section", number);
      auto tokens = tokenize(raw, number);
      if (!tokens.empty()) sections[current].push_back({number, std::move(tokens)});
    }
    if (end == text.size()) break;
  }

  Scenario s;

  // [graph]
  std::vector<std::string> vertices;
  std::vector<EdgeSpec> edges;
  for (const Line& l : sections["graph"]) {
    const auto& t = l.tokens;
    if (!t[0].key.empty()) throw ScenarioSyntaxError("expected 'vertex' or 'edge'", l.number);
    if (t[0].value == "vertex") {
      if (t.size() != 2 || !t[1].key.empty()) throw ScenarioSyntaxError("expected 'vertex <id>'", l.number);
      vertices.push_back(t[1].value);
    } else if (t[0].value == "edge") {
      if (t.size() != 5 || !t[1].key.empty() || !t[2].key.empty() || !t[3].key.empty())
        throw ScenarioSyntaxError("expected 'edge <id> <tail> <head> length=<r>'", l.number);
      if (t[4].key != "length") throw ScenarioSyntaxError("unknown key '" + t[4].key + "'", l.number);
      edges.push_back({t[1].value, t[2].value, t[3].value, parse_real(t[4].value, l.number)});
    } else {
      throw ScenarioSyntaxError("unknown graph entry '" + t[0].value + "'", l.number);
    }
  }
  s.graph = MetricGraph::build(vertices, edges);
  const std::size_t ne = s.graph.num_edges();

  // Resolves per-edge key/value lines with '*' defaults.
  auto per_edge = [&](const std::string& section, const std::vector<std::string>& keys) {
    std::vector<std::map<std::string, std::pair<std::string, std::size_t>>> values(ne);
    std::map<std::string, std::pair<std::string, std::size_t>> defaults;
    for (const Line& l : sections[section]) {
      const auto& t = l.tokens;
      if (!t[0].key.empty()) throw ScenarioSyntaxError("expected an edge id or '*'", l.number);
      std::map<std::string, std::pair<std::string, std::size_t>>* target = &defaults;
      if (t[0].value != "*") {
        if (!s.graph.has_edge(t[0].value)) throw ValidationError("line " + std::to_string(l.number) + ": unknown edge '" + t[0].value + "'");
        target = &values[s.graph.edge_index(t[0].value)];
      }
      for (std::size_t k = 1; k < t.size(); ++k) {
        if (t[k].key.empty()) throw ScenarioSyntaxError("expected key=value, found '" + t[k].value + "'", l.number);
        if (std::find(keys.begin(), keys.end(), t[k].key) == keys.end())
          throw ScenarioSyntaxError("unknown key '" + t[k].key + "'", l.number);
        (*target)[t[k].key] = {t[k].value, l.number};
      }
    }
    for (std::size_t e = 0; e < ne; ++e) {
      for (const auto& key : keys) {
        if (values[e].count(key)) continue;
        auto it = defaults.find(key);
        if (it == defaults.end())
          throw ValidationError("[" + section + "] has no value of '" + key + "' for edge '" + s.graph.edge(e).id + "'");
        values[e][key] = it->second;
      }
    }
    return values;
  };

  // [params]
  {
    auto values = per_edge("params", {"alpha", "beta", "gamma", "delta", "chi"});
    std::vector<EdgeCoefficients> coeffs(ne);
    for (std::size_t e = 0; e < ne; ++e) {
      auto get = [&](const char* key) { return parse_real(values[e][key].first, values[e][key].second); };
      coeffs[e] = {get("alpha"), get("beta"), get("gamma"), get("delta"), get("chi")};
    }
    s.params = EdgeParams(std::move(coeffs));
  }

  // [initial]
  {
    auto values = per_edge("initial", {"u", "c"});
    for (std::size_t e = 0; e < ne; ++e) {
      s.initial_u.push_back(parse_expr(values[e]["u"].first, "x", values[e]["u"].second));
      s.initial_c.push_back(parse_expr(values[e]["c"].first, "x", values[e]["c"].second));
    }
  }

  // [boundary]
  for (const Line& l : sections["boundary"]) {
    const auto& t = l.tokens;
    if (!t[0].key.empty()) throw ScenarioSyntaxError("expected a vertex id", l.number);
    if (!s.graph.has_vertex(t[0].value))
      throw ValidationError("line " + std::to_string(l.number) + ": unknown vertex '" + t[0].value + "'");
    const std::size_t v = s.graph.vertex_index(t[0].value);
    if (!s.graph.is_boundary(v))
      throw ValidationError("line " + std::to_string(l.number) + ": boundary condition at interior vertex '" + t[0].value + "'");
    BoundaryCondition& bc = s.boundary[v];
    for (std::size_t k = 1; k < t.size(); ++k) {
      if (t[k].key == "influx_u") bc.influx_u = parse_expr(t[k].value, "w", l.number);
      else if (t[k].key == "influx_c") bc.influx_c = parse_expr(t[k].value, "w", l.number);
      else if (t[k].key.empty()) throw ScenarioSyntaxError("expected key=value, found '" + t[k].value + "'", l.number);
      else throw ScenarioSyntaxError("unknown key '" + t[k].key + "'", l.number);
    }
  }

  // [discretization]
  std::optional<double> h, tau, t_end;
  for (const Line& l : sections["discretization"]) {
    for (const Token& t : l.tokens) {
      if (t.key == "h") h = parse_real(t.value, l.number);
      else if (t.key == "tau") tau = parse_real(t.value, l.number);
      else if (t.key == "t_end") t_end = parse_real(t.value, l.number);
      else if (t.key.empty()) throw ScenarioSyntaxError("expected key=value, found '" + t.value + "'", l.number);
      else throw ScenarioSyntaxError("unknown key '" + t.key + "'", l.number);
    }
  }
  if (!h || !tau || !t_end) throw ValidationError("[discretization] requires h, tau and t_end");
  s.discretization = {*h, *tau, *t_end};

  // [output]
  for (const Line& l : sections["output"]) {
    for (const Token& t : l.tokens) {
      if (t.key != "stride") {
        if (t.key.empty()) throw ScenarioSyntaxError("expected key=value, found '" + t.value + "'", l.number);
        throw ScenarioSyntaxError("unknown key '" + t.key + "'", l.number);
      }
      std::size_t v = 0;
      auto [ptr, ec] = std::from_chars(t.value.data(), t.value.data() + t.value.size(), v);
      if (ec != std::errc{} || ptr != t.value.data() + t.value.size())
        throw ScenarioSyntaxError("stride must be a positive integer", l.number);
      s.stride = v;
    }
  }

  s.validate();
  return s;
}

inline Scenario parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read scenario file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

/// Writes a scenario that parses back into an identical Scenario.
inline std::string serialize_scenario(const Scenario& s) {
  using scenario_detail::format_real;
  std::ostringstream out;
  out << "[graph]\n";
  for (const auto& v : s.graph.vertex_ids()) out << "vertex " << v << "\n";
  for (const auto& e : s.graph.edges())
    out << "edge " << e.id << " " << s.graph.vertex_id(e.tail) << " " << s.graph.vertex_id(e.head)
        << " length=" << format_real(e.length) << "\n";
  out << "\n[params]\n";
  for (std::size_t e = 0; e < s.graph.num_edges(); ++e) {
    const auto& c = s.params[e];
    out << s.graph.edge(e).id << " alpha=" << format_real(c.alpha) << " beta=" << format_real(c.beta)
        << " gamma=" << format_real(c.gamma) << " delta=" << format_real(c.delta) << " chi=" << format_real(c.chi)
        << "\n";
  }
  out << "\n[initial]\n";
  for (std::size_t e = 0; e < s.graph.num_edges(); ++e)
    out << s.graph.edge(e).id << " u=\"" << s.initial_u[e].to_string("x") << "\" c=\""
        << s.initial_c[e].to_string("x") << "\"\n";
  if (!s.boundary.empty()) {
    out << "\n[boundary]\n";
    for (const auto& [v, bc] : s.boundary) {
      out << s.graph.vertex_id(v);
      if (bc.influx_u) out << " influx_u=\"" << bc.influx_u->to_string("w") << "\"";
      if (bc.influx_c) out << " influx_c=\"" << bc.influx_c->to_string("w") << "\"";
      out << "\n";
    }
  }
  out << "\n[discretization]\n";
  out << "h=" << format_real(s.discretization.h) << " tau=" << format_real(s.discretization.tau)
      << " t_end=" << format_real(s.discretization.t_end) << "\n";
  if (s.stride) out << "\n[output]\nstride=" << *s.stride << "\n";
  return out.str();
}

}  // namespace ksnet
