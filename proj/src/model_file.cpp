#include "qameta/model_file.hpp"

#include <cstdio>
#include <fstream>

#include "qameta/error.hpp"

namespace qameta {

namespace {

std::uint64_t fnv1a(std::uint64_t h, std::string_view bytes) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

nlohmann::json body_json(const ModelFile& file) {
    const auto& m = file.meta;
    nlohmann::json groups = nlohmann::json::array();
    for (auto g : m.groups) groups.push_back(std::string(group_name(g)));
    nlohmann::json systems = nlohmann::json::array();
    for (std::size_t s = 0; s < m.systems.size(); ++s) {
        systems.push_back({{"name", m.systems[s]}, {"training_mean_f1", m.training_mean_f1.at(s)}});
    }
    return {{"schema_id", m.schema_id},
            {"groups", std::move(groups)},
            {"systems", std::move(systems)},
            {"policy",
             {{"tie_break", m.policy.tie_break == TieBreak::TrainingMeanF1 ? "training_mean_f1" : "lowest_index"},
              {"fallback", m.policy.fallback}}},
            {"seed", m.seed},
            {"model", m.model.to_json()},
            {"gazetteer", file.gazetteer.to_json()}};
}

std::string digest_of(const nlohmann::json& body) { return fingerprint_of({body.dump()}); }

}  // namespace

std::string fingerprint_of(std::initializer_list<std::string_view> parts) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto p : parts) {
        h = fnv1a(h, std::to_string(p.size()) + ":");
        h = fnv1a(h, p);
    }
    return hex(h);
}

nlohmann::json model_to_json(const ModelFile& file) {
    nlohmann::json body = body_json(file);
    nlohmann::json j{{"format_version", std::string(kModelFormatVersion)},
                     {"fingerprint", file.fingerprint},
                     {"digest", digest_of(body)}};
    j["body"] = std::move(body);
    return j;
}

ModelFile model_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("format_version")) throw DataError("model file: missing format_version");
    const auto version = j.at("format_version");
    if (!version.is_string() || version.get<std::string>() != kModelFormatVersion) {
        throw DataError("model file: unsupported format_version " + version.dump() + " (expected \"" +
                        std::string(kModelFormatVersion) + "\")");
    }
    try {
        const auto& body = j.at("body");
        if (digest_of(body) != j.at("digest").get<std::string>()) {
            throw DataError("model file: digest mismatch, the model body was modified or corrupted");
        }
        ModelFile file;
        file.fingerprint = j.at("fingerprint").get<std::string>();
        file.gazetteer = parse_gazetteer(body.at("gazetteer").dump());
        auto& m = file.meta;
        m.model = MultiLabelModel::from_json(body.at("model"));
        m.schema_id = body.at("schema_id").get<std::string>();
        if (m.schema_id != standard_schema().id) throw DataError("model file: unknown feature schema " + m.schema_id);
        for (const auto& g : body.at("groups")) {
            const auto group = parse_group(g.get<std::string>());
            if (!group) throw DataError("model file: unknown feature group " + g.dump());
            m.groups.push_back(*group);
        }
        for (const auto& s : body.at("systems")) {
            m.systems.push_back(s.at("name").get<std::string>());
            m.training_mean_f1.push_back(s.at("training_mean_f1").get<double>());
        }
        const auto& policy = body.at("policy");
        m.policy.tie_break = policy.at("tie_break").get<std::string>() == "lowest_index" ? TieBreak::LowestIndex
                                                                                           : TieBreak::TrainingMeanF1;
        m.policy.fallback = policy.at("fallback").get<std::size_t>();
        m.seed = body.at("seed").get<std::uint64_t>();
        if (m.systems.size() != m.model.label_count()) throw DataError("model file: roster and label count differ");
        if (m.policy.fallback >= m.systems.size()) throw DataError("model file: fallback system out of range");
        std::size_t width = 0;
        for (auto g : m.groups) width += group_width(g);
        if (width != m.model.width()) throw DataError("model file: feature groups do not match model width");
        return file;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("model file: malformed content: ") + e.what());
    }
}

void save_model(const std::filesystem::path& path, const ModelFile& file) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model file: " + path.string());
    out << model_to_json(file).dump(1) << "\n";
}

ModelFile load_model(const std::filesystem::path& path) {
    const std::string content = read_file(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(content);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(path.string() + ": model file is not valid JSON: " + e.what());
    }
    try {
        return model_from_json(j);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

}  // namespace qameta
