#include "anosov/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace anosov {

std::string format_double(double v) {
  if (std::isnan(v)) return "null";
  if (std::isinf(v)) return v > 0 ? "1e309" : "-1e309";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void quote(std::string& out, const std::string& s) { out += Json(s).dump(); }

void emit(const Json& j, int indent, int level, std::string& out) {
  auto pad = [&](int l) {
    if (indent > 0) {
      out += '\n';
      out.append(std::size_t(indent * l), ' ');
    }
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        pad(level + 1);
        quote(out, it.key());
        out += indent > 0 ? ": " : ":";
        emit(it.value(), indent, level + 1, out);
      }
      pad(level);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& e : j) flat = flat && !e.is_structured();
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat ? ", " : ",";
        first = false;
        if (!flat) pad(level + 1);
        emit(e, indent, level + 1, out);
      }
      if (!flat) pad(level);
      out += ']';
      return;
    }
    case Json::value_t::number_float: out += format_double(j.get<double>()); return;
    default: out += j.dump(); return;
  }
}

}  // namespace

std::string dump_json(const Json& j, int indent) {
  std::string out;
  emit(j, indent, 0, out);
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

void ensure_directory(const std::string& dir) {
  if (!dir.empty()) std::filesystem::create_directories(dir);
}

}  // namespace anosov
