#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"
#include "qameta/features.hpp"
#include "qameta/selection.hpp"

namespace qameta {

inline constexpr std::string_view kModelFormatVersion = "1";

/// A persisted router. The gazetteer travels with the model so routing uses the
/// same extraction as training.
struct ModelFile {
    MetaModel meta;
    Gazetteer gazetteer;
    std::string fingerprint;  // hash of the training inputs
};

/// 64-bit FNV-1a, hex encoded, over the concatenated parts (each length-prefixed).
std::string fingerprint_of(std::initializer_list<std::string_view> parts);

nlohmann::json model_to_json(const ModelFile& file);
/// Throws DataError on a wrong format_version, a digest mismatch or malformed content.
ModelFile model_from_json(const nlohmann::json& j);

void save_model(const std::filesystem::path& path, const ModelFile& file);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace qameta
