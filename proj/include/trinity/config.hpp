#ifndef TRINITY_CONFIG_HPP_
#define TRINITY_CONFIG_HPP_

// JSON schemas for the configuration types. Missing keys take their defaults;
// a present schema_version must match the supported one.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "trinity/model.hpp"
#include "trinity/synthgen.hpp"

namespace trinity {

void to_json(nlohmann::json& j, const GenConfig& c);
void from_json(const nlohmann::json& j, GenConfig& c);

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

namespace nn {
void to_json(nlohmann::json& j, const AdamConfig& c);
void from_json(const nlohmann::json& j, AdamConfig& c);
}  // namespace nn

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace trinity

#endif  // TRINITY_CONFIG_HPP_
