#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qameta/dataset.hpp"

namespace qameta {

enum class QuestionType { List, Boolean, Resource, Number };
enum class ResourceType { Misc, Date, Boolean, Number, Person, Organization, Location };
enum class WhType { Who, Which, How, InWhich, What, When, Where, Ask, Other };
enum class EntityType { Person, Money, Location, Percent, Organization, Date, Misc };

inline constexpr std::size_t kQuestionTypeCount = 4;
inline constexpr std::size_t kResourceTypeCount = 7;
inline constexpr std::size_t kWhTypeCount = 9;
inline constexpr std::size_t kEntityTypeCount = 7;

std::string_view to_string(QuestionType v);
std::string_view to_string(ResourceType v);
std::string_view to_string(WhType v);
std::string_view to_string(EntityType v);

std::optional<QuestionType> parse_question_type(std::string_view s);
std::optional<ResourceType> parse_resource_type(std::string_view s);
std::optional<EntityType> parse_entity_type(std::string_view s);

/// Majority type over an answer set's entries; ties go to the earlier enum member.
ResourceType majority_resource_type(const std::vector<ResourceType>& entries);

/// Surface-form lookup standing in for named-entity recognition.
class Gazetteer {
public:
    Gazetteer() = default;

    /// Throws DataError when a normalized surface form is already present.
    void add_entity(std::string_view surface, EntityType type);
    void add_comparative(std::string_view word);
    void add_superlative(std::string_view word);

    /// Type for an already normalized, space-joined token sequence.
    std::optional<EntityType> lookup(const std::string& normalized) const;
    std::size_t longest_entry() const { return longest_; }
    std::size_t entity_count() const { return entities_.size(); }

    bool is_comparative(const std::string& token) const;
    bool is_superlative(const std::string& token) const;

    /// Same layout as the gazetteer file, with normalized surface forms.
    nlohmann::json to_json() const;

private:
    std::map<std::string, EntityType> entities_;
    std::set<std::string> comparatives_;
    std::set<std::string> superlatives_;
    std::size_t longest_ = 0;
};

Gazetteer load_gazetteer(const std::filesystem::path& path);
Gazetteer parse_gazetteer(std::string_view json_text);

struct Token {
    std::string text;  // lowercase
    std::optional<EntityType> entity;
};

/// Lowercase words with surrounding punctuation stripped and possessive 's removed.
std::vector<std::string> split_words(std::string_view text);

/// Words with maximal gazetteer matches merged (longest match, left to right).
std::vector<Token> tokenize_entities(std::string_view text, const Gazetteer& gazetteer);
std::vector<std::string> tokenize_merged(std::string_view text, const Gazetteer& gazetteer);

struct QuestionFeatures {
    QuestionType question_type = QuestionType::Resource;
    ResourceType query_resource_type = ResourceType::Misc;
    WhType wh_type = WhType::Other;
    int token_count = 1;
    bool comparative = false;
    bool superlative = false;
    std::array<bool, kEntityTypeCount> entity_flags{};  // indexed by EntityType

    bool has_entity(EntityType t) const { return entity_flags[static_cast<std::size_t>(t)]; }
    friend bool operator==(const QuestionFeatures&, const QuestionFeatures&) = default;
};

WhType classify_wh(const std::vector<std::string>& words);

QuestionFeatures extract(const QuestionRecord& question, const Gazetteer& gazetteer);

// ---------------------------------------------------------------------------
// Encoding

enum class FeatureGroup { QT, QRT, QW, Tokens, Comp, Sup, Pers, Money, Loc, Percent, Org, Date, Misc };
inline constexpr std::size_t kFeatureGroupCount = 13;

std::string_view group_name(FeatureGroup g);
std::optional<FeatureGroup> parse_group(std::string_view name);
const std::vector<FeatureGroup>& all_groups();

/// Parses a comma list such as "#T,Loc,QW,QRT". Throws ParamError on unknown names or an empty list.
std::vector<FeatureGroup> parse_group_list(std::string_view list);
std::string format_group_list(const std::vector<FeatureGroup>& groups);

/// Slot width of each feature group in the encoding.
std::size_t group_width(FeatureGroup g);

struct EncodingSchema {
    std::string id;
    std::size_t question_type_width;
    std::size_t resource_type_width;
    std::size_t wh_type_width;
};

EncodingSchema standard_schema();

struct FeatureVector {
    std::vector<double> slots;
    std::vector<FeatureGroup> groups;  // canonical order
    std::string schema_id;

    std::size_t width() const { return slots.size(); }
    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

FeatureVector encode(const QuestionFeatures& features, const EncodingSchema& schema = standard_schema());

/// Keeps only the selected groups' slots, in the vector's order.
FeatureVector restrict(const FeatureVector& vector, const std::vector<FeatureGroup>& selection);

/// Column names for a vector built from the given groups ("QW=Which", "#T", ...).
std::vector<std::string> slot_names(const std::vector<FeatureGroup>& groups);

/// Categorical state of one group, used for contingency tables. #T is bucketed.
std::string group_state(const QuestionFeatures& features, FeatureGroup group);
std::string token_bucket(int token_count);

}  // namespace qameta
