#pragma once

#include <string>

#include <json.hpp>

#include "tlhs/pipeline.hpp"

namespace tlhs {

using Json = nlohmann::ordered_json;

/// Serializes with every float printed at 17 significant digits.
std::string dump_json(const Json& j, int indent = 2);

Json to_json(const TesterReport& r);
Json to_json(const LearnResult& r);
Json to_json(const UnitVector& w);

/// CSV with header `y,x1,...,xd` and 17-significant-digit coordinates.
std::string format_csv(const LabeledDataset& s);
LabeledDataset parse_csv(const std::string& text);

std::string read_file(const std::string& path);
/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

LabeledDataset read_csv(const std::string& path);
void write_csv(const std::string& path, const LabeledDataset& s);

}  // namespace tlhs
