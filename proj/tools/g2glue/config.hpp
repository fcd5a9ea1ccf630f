#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include "g2glue/torus_solver.hpp"

namespace g2glue::cli {

/// Invalid configuration: parse error, unknown key or domain violation (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable input or unwritable output (exit code 3).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Format { Json, Csv, Both };

struct EhSettings {
  std::size_t samples = 1000;
  std::uint64_t seed = 1;
  std::vector<double> k_list{1.0, 1e-2, 1e-4};
  double r_min = 1.01;
  double r_max = 1e4;
  int grid = 400;
  double t = 0.3;  ///< gluing scale of the rescaling check
};

struct ConeSettings {
  std::string link = "so3";
  int degree = 2;
  std::string from = "-4";  ///< rates window is the open interval (from, to)
  std::string to = "0";
  std::string index_from = "-5/2";
  std::string index_to = "-3/2";
  std::string ceiling = "400";
};

struct RatesSettings {
  std::string beta = "-eps";  ///< rational in (-4, 0) or the infinitesimal -eps
  std::string alpha = "eps";  ///< rational in (0, 1) or the infinitesimal eps
  std::string b = "-1/5";
};

struct KummerSettings {
  std::vector<double> t_list{0.2, 0.1, 0.05, 0.025};
  std::size_t samples = 20000;
  double beta = -0.05;
  double alpha = 0.5;
  std::uint64_t seed = 1;
  int b2 = 0;
};

struct OutputSettings {
  std::string path;  ///< prefix; empty writes nothing
  Format format = Format::Json;
};

struct RunConfig {
  EhSettings eh;
  ConeSettings cone;
  RatesSettings rates;
  KummerSettings kummer;
  torus::SolverConfig torus;
  std::string torus_dump;
  OutputSettings output;
};

/// Defaults, with kummer.b2 set to the computed invariant second Betti number.
RunConfig default_config();

/// Parses `key = value` lines grouped under `[section]` headers. `#` and `;`
/// start comments. Errors name the source and line.
RunConfig parse_config(std::istream& in, const std::string& source);
RunConfig load_config(const std::filesystem::path& path);

/// Sets `section.key`; `where` prefixes error messages.
void set_value(RunConfig& cfg, const std::string& key, const std::string& value, const std::string& where);

/// Cross-key checks (ranges with two ends); throws ConfigError.
void validate(const RunConfig& cfg);

/// All keys accepted in files and on the command line, as `section.key`.
std::vector<std::string> known_keys();

std::string to_string(Format f);

}  // namespace g2glue::cli
