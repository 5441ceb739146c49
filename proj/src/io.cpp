#include "tlhs/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace tlhs {

namespace {

std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

void dump_into(const Json& j, int indent, int depth, std::string& out) {
  const bool pretty = indent >= 0;
  auto newline = [&](int level) {
    if (!pretty) return;
    out += '\n';
    out.append(static_cast<std::size_t>(level * indent), ' ');
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += Json(key).dump();
        out += pretty ? ": " : ":";
        dump_into(value, indent, depth + 1, out);
      }
      newline(depth);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& value : j) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        dump_into(value, indent, depth + 1, out);
      }
      newline(depth);
      out += ']';
      return;
    }
    case Json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump_json(const Json& j, int indent) {
  std::string out;
  dump_into(j, indent, 0, out);
  out += '\n';
  return out;
}

Json to_json(const TesterReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name},
                      {"measured", c.measured},
                      {"threshold", c.threshold},
                      {"passed", c.passed}});
  }
  return {{"accepted", r.accepted}, {"samples_used", r.samples_used}, {"checks", checks}};
}

Json to_json(const UnitVector& w) {
  Json a = Json::array();
  for (double x : w.coords()) a.push_back(x);
  return a;
}

Json to_json(const LearnResult& r) {
  Json j;
  j["rejected"] = r.rejected;
  if (r.hypothesis) j["hypothesis"] = to_json(*r.hypothesis);
  if (r.empirical_error) j["empirical_error"] = *r.empirical_error;
  j["sigma_used"] = r.sigma_used;
  j["candidates_examined"] = r.candidates_examined;
  if (r.excess_bound) j["excess_bound"] = *r.excess_bound;
  Json reports = Json::array();
  for (const auto& rep : r.tester_reports) reports.push_back(to_json(rep));
  j["tester_reports"] = reports;
  return j;
}

std::string format_csv(const LabeledDataset& s) {
  std::string out = "y";
  for (std::size_t j = 1; j <= s.dim(); ++j) out += ",x" + std::to_string(j);
  out += '\n';
  char buf[40];
  for (std::size_t i = 0; i < s.size(); ++i) {
    out += s.label(i) > 0 ? "1" : "-1";
    for (double x : s.point(i)) {
      std::snprintf(buf, sizeof buf, ",%.17g", x);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

LabeledDataset parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::kIo, "csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::size_t d = 0;
  {
    std::istringstream h(line);
    std::string field;
    std::getline(h, field, ',');
    if (field != "y") fail(ErrorCode::kIo, "csv: header must start with y");
    while (std::getline(h, field, ',')) {
      if (field != "x" + std::to_string(d + 1)) {
        fail(ErrorCode::kIo, "csv: unexpected header field '" + field + "'");
      }
      ++d;
    }
  }
  if (d == 0) fail(ErrorCode::kIo, "csv: no coordinate columns");

  Vec points;
  std::vector<int> labels;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = p + line.size();
    auto bad = [&](const char* what) {
      fail(ErrorCode::kIo, "csv: row " + std::to_string(row) + ": " + what);
    };
    int y = 0;
    auto [q, ec] = std::from_chars(p, end, y);
    if (ec != std::errc() || (y != 1 && y != -1)) bad("label must be -1 or 1");
    p = q;
    for (std::size_t j = 0; j < d; ++j) {
      if (p == end || *p != ',') bad("too few columns");
      ++p;
      double x = 0.0;
      auto [r, ec2] = std::from_chars(p, end, x);
      if (ec2 != std::errc() || !std::isfinite(x)) bad("coordinate is not a finite number");
      p = r;
      points.push_back(x);
    }
    if (p != end) bad("too many columns");
    labels.push_back(y);
  }
  if (labels.empty()) fail(ErrorCode::kEmptyDataset, "csv: no rows");
  return LabeledDataset(d, std::move(points), std::move(labels));
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::kIo, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << f.rdbuf();
  if (f.bad()) fail(ErrorCode::kIo, "read error on '" + path + "'");
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) fail(ErrorCode::kIo, "cannot open '" + tmp.string() + "' for writing");
    f << content;
    f.flush();
    if (!f) {
      f.close();
      std::error_code ignored;
      fs::remove(tmp, ignored);
      fail(ErrorCode::kIo, "write error on '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(ErrorCode::kIo, "cannot move output into '" + path + "'");
  }
}

LabeledDataset read_csv(const std::string& path) { return parse_csv(read_file(path)); }

void write_csv(const std::string& path, const LabeledDataset& s) {
  write_file_atomic(path, format_csv(s));
}

}  // namespace tlhs
