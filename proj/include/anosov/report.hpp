#pragma once

#include <string>

#include "json.hpp"

namespace anosov {

using Json = nlohmann::ordered_json;

// %.17g for every number, so equal inputs give byte-identical reports.
std::string format_double(double v);
std::string dump_json(const Json& j, int indent = 2);

void write_text_file(const std::string& path, const std::string& text);
// Creates the directory (and parents) when missing.
void ensure_directory(const std::string& dir);

}  // namespace anosov
