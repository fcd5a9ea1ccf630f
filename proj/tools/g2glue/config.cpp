#include "g2glue/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "g2glue/cone_spectral.hpp"
#include "g2glue/errors.hpp"
#include "g2glue/kummer.hpp"

namespace g2glue::cli {

namespace {

using Setter = std::function<void(RunConfig&, const std::string&)>;

std::string trim(const std::string& s) {
  const auto b = std::find_if_not(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
  const auto e = std::find_if_not(s.rbegin(), s.rend(), [](unsigned char c) { return std::isspace(c); }).base();
  return b < e ? std::string(b, e) : std::string();
}

double to_double(const std::string& v) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError("expected a number, got '" + v + "'");
  return x;
}

std::int64_t to_int(const std::string& v) {
  std::int64_t x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError("expected an integer, got '" + v + "'");
  return x;
}

std::vector<double> to_list(const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item)));
  if (out.empty()) throw ConfigError("expected a comma-separated list of numbers");
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ConfigError("expected true or false, got '" + v + "'");
}

cone::Rational to_rational(const std::string& v) {
  try {
    return cone::parse_rational(v);
  } catch (const DomainError&) {
    throw ConfigError("expected a rational (p, p/q or a decimal), got '" + v + "'");
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

std::size_t positive_count(const std::string& v) {
  const auto n = to_int(v);
  require(n >= 1, "must be a positive integer");
  return static_cast<std::size_t>(n);
}

std::uint64_t seed_value(const std::string& v) {
  const auto n = to_int(v);
  require(n >= 0, "seed must be non-negative");
  return static_cast<std::uint64_t>(n);
}

void check_open_beta(double beta) { require(beta > -4.0 && beta < 0.0, "beta must lie in (-4, 0)"); }

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"eh.samples", [](RunConfig& c, const std::string& v) { c.eh.samples = positive_count(v); }},
      {"eh.seed", [](RunConfig& c, const std::string& v) { c.eh.seed = seed_value(v); }},
      {"eh.k_list",
       [](RunConfig& c, const std::string& v) {
         const auto l = to_list(v);
         for (double k : l) require(k > 0.0 && k <= 1.0, "every k must lie in (0, 1]");
         c.eh.k_list = l;
       }},
      {"eh.r_min",
       [](RunConfig& c, const std::string& v) {
         const double x = to_double(v);
         require(x > 1.0, "r_min must exceed 1");
         c.eh.r_min = x;
       }},
      {"eh.r_max", [](RunConfig& c, const std::string& v) { c.eh.r_max = to_double(v); }},
      {"eh.grid",
       [](RunConfig& c, const std::string& v) {
         const auto n = to_int(v);
         require(n >= 3, "grid must have at least 3 points");
         c.eh.grid = static_cast<int>(n);
       }},
      {"eh.t",
       [](RunConfig& c, const std::string& v) {
         const double x = to_double(v);
         require(x > 0.0 && x <= 1.0, "t must lie in (0, 1]");
         c.eh.t = x;
       }},

      {"cone.link",
       [](RunConfig& c, const std::string& v) {
         require(v == "so3" || v == "s3", "link must be so3 or s3");
         c.cone.link = v;
       }},
      {"cone.degree",
       [](RunConfig& c, const std::string& v) {
         const auto n = to_int(v);
         require(n >= 0 && n <= 4, "degree must lie in 0..4");
         c.cone.degree = static_cast<int>(n);
       }},
      {"cone.from", [](RunConfig& c, const std::string& v) { to_rational(v), c.cone.from = v; }},
      {"cone.to", [](RunConfig& c, const std::string& v) { to_rational(v), c.cone.to = v; }},
      {"cone.index_from", [](RunConfig& c, const std::string& v) { to_rational(v), c.cone.index_from = v; }},
      {"cone.index_to", [](RunConfig& c, const std::string& v) { to_rational(v), c.cone.index_to = v; }},
      {"cone.ceiling",
       [](RunConfig& c, const std::string& v) {
         require(to_rational(v) > 0, "ceiling must be positive");
         c.cone.ceiling = v;
       }},

      {"rates.beta",
       [](RunConfig& c, const std::string& v) {
         if (v != "-eps") {
           const auto b = to_rational(v);
           require(b > -4 && b < 0, "beta must lie in (-4, 0)");
         }
         c.rates.beta = v;
       }},
      {"rates.alpha",
       [](RunConfig& c, const std::string& v) {
         if (v != "eps") {
           const auto a = to_rational(v);
           require(a > 0 && a < 1, "alpha must lie in (0, 1)");
         }
         c.rates.alpha = v;
       }},
      {"rates.b",
       [](RunConfig& c, const std::string& v) {
         const auto b = to_rational(v);
         require(b >= -1 && b <= 0, "B must lie in [-1, 0]");
         c.rates.b = v;
       }},

      {"kummer.t_list",
       [](RunConfig& c, const std::string& v) {
         const auto l = to_list(v);
         for (double t : l) require(t > 0.0 && t <= 0.3, "every t must lie in (0, 0.3]");
         c.kummer.t_list = l;
       }},
      {"kummer.samples",
       [](RunConfig& c, const std::string& v) {
         const auto n = positive_count(v);
         require(n >= 10, "samples must be at least 10");
         c.kummer.samples = n;
       }},
      {"kummer.beta",
       [](RunConfig& c, const std::string& v) {
         const double b = to_double(v);
         check_open_beta(b);
         c.kummer.beta = b;
       }},
      {"kummer.alpha",
       [](RunConfig& c, const std::string& v) {
         const double a = to_double(v);
         require(a > 0.0 && a < 1.0, "alpha must lie in (0, 1)");
         c.kummer.alpha = a;
       }},
      {"kummer.seed", [](RunConfig& c, const std::string& v) { c.kummer.seed = seed_value(v); }},
      {"kummer.b2",
       [](RunConfig& c, const std::string& v) {
         const auto n = to_int(v);
         require(n >= 0, "b2 must be non-negative");
         c.kummer.b2 = static_cast<int>(n);
       }},

      {"torus.n",
       [](RunConfig& c, const std::string& v) {
         const auto n = to_int(v);
         require(n == 4 || n == 6 || n == 8, "n must be 4, 6 or 8");
         c.torus.n = static_cast<int>(n);
       }},
      {"torus.eps",
       [](RunConfig& c, const std::string& v) {
         const double e = to_double(v);
         require(e >= 0.0 && e <= 0.5, "eps must lie in [0, 0.5]");
         c.torus.eps = e;
       }},
      {"torus.seed", [](RunConfig& c, const std::string& v) { c.torus.seed = seed_value(v); }},
      {"torus.tol",
       [](RunConfig& c, const std::string& v) {
         const double t = to_double(v);
         require(t > 0.0, "tol must be positive");
         c.torus.tol = t;
       }},
      {"torus.max_iter", [](RunConfig& c, const std::string& v) { c.torus.max_iter = static_cast<int>(positive_count(v)); }},
      {"torus.mode",
       [](RunConfig& c, const std::string& v) {
         try {
           c.torus.mode = torus::operator_mode_from_string(v);
         } catch (const DomainError&) {
           throw ConfigError("mode must be flat or cg");
         }
       }},
      {"torus.fallback", [](RunConfig& c, const std::string& v) { c.torus.fallback = to_bool(v); }},
      {"torus.dump", [](RunConfig& c, const std::string& v) { c.torus_dump = v; }},

      {"output.path", [](RunConfig& c, const std::string& v) { c.output.path = v; }},
      {"output.format",
       [](RunConfig& c, const std::string& v) {
         if (v == "json")
           c.output.format = Format::Json;
         else if (v == "csv")
           c.output.format = Format::Csv;
         else if (v == "both")
           c.output.format = Format::Both;
         else
           throw ConfigError("format must be json, csv or both");
       }},
  };
  return table;
}

const std::set<std::string>& sections() {
  static const std::set<std::string> s = [] {
    std::set<std::string> out;
    for (const auto& [key, setter] : setters()) out.insert(key.substr(0, key.find('.')));
    return out;
  }();
  return s;
}

}  // namespace

RunConfig default_config() {
  RunConfig c;
  c.kummer.b2 = kummer::invariant_betti(2);
  return c;
}

void set_value(RunConfig& cfg, const std::string& key, const std::string& value, const std::string& where) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError(where + ": unknown key '" + key + "'");
  try {
    it->second(cfg, value);
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + key + ": " + e.what());
  }
}

void validate(const RunConfig& cfg) {
  if (!(cfg.eh.r_min < cfg.eh.r_max)) throw ConfigError("eh.r_max: must exceed eh.r_min");
  if (!(to_rational(cfg.cone.from) < to_rational(cfg.cone.to))) throw ConfigError("cone.to: must exceed cone.from");
  if (!(to_rational(cfg.cone.index_from) < to_rational(cfg.cone.index_to)))
    throw ConfigError("cone.index_to: must exceed cone.index_from");
}

RunConfig parse_config(std::istream& in, const std::string& source) {
  RunConfig cfg = default_config();
  std::string line, section;
  std::set<std::string> seen;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string where = source + ":" + std::to_string(number);
    const auto comment = line.find_first_of("#;");
    const std::string text = trim(comment == std::string::npos ? line : line.substr(0, comment));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = trim(text.substr(1, text.size() - 2));
      if (!sections().count(section)) throw ConfigError(where + ": unknown section '" + section + "'");
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError(where + ": expected 'key = value'");
    if (section.empty()) throw ConfigError(where + ": key '" + key + "' appears before any [section]");
    const std::string full = section + "." + key;
    if (!seen.insert(full).second) throw ConfigError(where + ": duplicate key '" + full + "'");
    set_value(cfg, full, value, where);
  }
  if (in.bad()) throw IoError("cannot read " + source);
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open configuration file " + path.string());
  return parse_config(in, path.string());
}

std::vector<std::string> known_keys() {
  std::vector<std::string> out;
  for (const auto& [key, setter] : setters()) out.push_back(key);
  return out;
}

std::string to_string(Format f) {
  switch (f) {
    case Format::Json:
      return "json";
    case Format::Csv:
      return "csv";
    case Format::Both:
      return "both";
  }
  return "json";
}

}  // namespace g2glue::cli
