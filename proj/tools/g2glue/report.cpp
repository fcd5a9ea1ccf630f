#include "report.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include "g2glue/parallel.hpp"

#ifndef G2GLUE_VERSION
#define G2GLUE_VERSION "unknown"
#endif

namespace g2glue::cli {

namespace {

std::string compiler_stamp() {
#if defined(__clang__)
  return std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  return std::string("gcc ") + __VERSION__;
#else
  return "unknown";
#endif
}

std::string compact(const json& j) { return j.is_string() ? j.get<std::string>() : j.dump(); }

}  // namespace

std::string to_string(Status s) {
  switch (s) {
    case Status::Pass:
      return "pass";
    case Status::Fail:
      return "fail";
    case Status::Reported:
      return "reported";
  }
  return "reported";
}

bool Report::ok() const {
  for (const auto& c : checks)
    if (c.status == Status::Fail) return false;
  return true;
}

Check& Report::add(Check c) {
  checks.push_back(std::move(c));
  return checks.back();
}

Check verdict(std::string name, bool pass, json measured, json expected, json tolerance, std::string anchor) {
  return {std::move(name), pass ? Status::Pass : Status::Fail, std::move(measured), std::move(expected),
          std::move(tolerance), std::move(anchor)};
}

Check reported(std::string name, json measured, std::string anchor) {
  return {std::move(name), Status::Reported, std::move(measured), nullptr, nullptr, std::move(anchor)};
}

json to_json(const Report& r) {
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name},
                      {"status", to_string(c.status)},
                      {"measured", c.measured},
                      {"expected", c.expected},
                      {"tolerance", c.tolerance},
                      {"anchor", c.anchor}});
  json failed = json::array();
  for (const auto& c : r.checks)
    if (c.status == Status::Fail) failed.push_back({{"name", c.name}, {"anchor", c.anchor}});
  json timing = json::object();
  for (const auto& [k, v] : r.timing) timing[k] = v;
  return {{"schema", kReportSchema},
          {"suite", r.suite},
          {"status", r.ok() ? "pass" : "fail"},
          {"environment",
           {{"version", G2GLUE_VERSION}, {"threads", max_parallelism()}, {"compiler", compiler_stamp()}}},
          {"checks", checks},
          {"failed", failed},
          {"data", r.data},
          {"timing", timing}};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string checks_csv(const Report& r) {
  std::ostringstream os;
  os << "# " << kChecksCsvSchema << "\n";
  os << "name,status,measured,expected,tolerance,anchor\n";
  for (const auto& c : r.checks)
    os << csv_field(c.name) << ',' << to_string(c.status) << ',' << csv_field(compact(c.measured)) << ','
       << csv_field(compact(c.expected)) << ',' << csv_field(compact(c.tolerance)) << ',' << csv_field(c.anchor)
       << '\n';
  return os.str();
}

std::string summary(const Report& r) {
  std::ostringstream os;
  for (const auto& c : r.checks) {
    os << "[" << (c.status == Status::Pass ? "PASS" : c.status == Status::Fail ? "FAIL" : "INFO") << "] " << c.name
       << ": measured " << compact(c.measured);
    if (!c.expected.is_null()) os << ", expected " << compact(c.expected);
    if (!c.tolerance.is_null()) os << ", tolerance " << compact(c.tolerance);
    if (c.status == Status::Fail) os << " (violates: " << c.anchor << ")";
    os << '\n';
  }
  os << r.suite << ": " << (r.ok() ? "pass" : "fail") << '\n';
  return os.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + tmp.string() + " for writing");
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    os.flush();
    if (!os) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw IoError("cannot write " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::vector<std::filesystem::path> write_outputs(const Report& r, const OutputSettings& out) {
  std::vector<std::filesystem::path> written;
  if (out.path.empty()) return written;
  auto with_suffix = [&](const std::string& suffix) { return std::filesystem::path(out.path + suffix); };
  if (out.format != Format::Csv) {
    written.push_back(with_suffix(".json"));
    write_atomic(written.back(), to_json(r).dump(2) + "\n");
  }
  if (out.format != Format::Json) {
    written.push_back(with_suffix(".csv"));
    write_atomic(written.back(), checks_csv(r));
    for (const auto& t : r.tables) {
      written.push_back(with_suffix("." + t.name + ".csv"));
      write_atomic(written.back(), "# " + t.schema + "\n" + t.csv);
    }
  }
  return written;
}

}  // namespace g2glue::cli
