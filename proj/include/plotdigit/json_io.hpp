#pragma once

// JSON/CSV file formats. Key order is fixed and output uses two-space
// indentation so files are byte-stable.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "plotdigit/pipeline.hpp"
#include "plotdigit/synthgen.hpp"

namespace plotdigit::json_io {

using Json = nlohmann::ordered_json;

Json to_json(const ExtractionResult& r);
/// Throws SchemaError.
ExtractionResult extraction_from_json(const Json& j);
/// Throws SchemaError with the offending path.
void validate_extraction(const Json& j);

Json to_json(const synth::GroundTruth& gt);
synth::GroundTruth ground_truth_from_json(const Json& j);

Json to_json(const EvaluationReport& r);
std::string pr_csv(const std::vector<eval::PRPoint>& pr);

std::string dump(const Json& j);
Json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace plotdigit::json_io
