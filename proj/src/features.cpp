#include "qameta/features.hpp"

#include <algorithm>
#include <cctype>

#include "json.hpp"
#include "qameta/error.hpp"
#include "text_util.hpp"

namespace qameta {

namespace {

constexpr std::array<std::string_view, kQuestionTypeCount> kQuestionTypeNames{"List", "Boolean", "Resource", "Number"};
constexpr std::array<std::string_view, kResourceTypeCount> kResourceTypeNames{
    "Misc", "Date", "Boolean", "Number", "Person", "Organization", "Location"};
constexpr std::array<std::string_view, kWhTypeCount> kWhTypeNames{"Who",     "Which", "How",   "InWhich", "What",
                                                                  "When",    "Where", "Ask",   "Other"};
constexpr std::array<std::string_view, kEntityTypeCount> kEntityTypeNames{
    "Person", "Money", "Location", "Percent", "Organization", "Date", "Misc"};
constexpr std::array<std::string_view, kFeatureGroupCount> kGroupNames{
    "QT", "QRT", "QW", "#T", "Comp", "Sup", "Pers", "Money", "Loc", "Percent", "Org", "Date", "Misc"};

template <std::size_t N>
std::optional<std::size_t> find_name(const std::array<std::string_view, N>& names, std::string_view s) {
    const std::string lower = detail::to_lower(detail::trim(s));
    for (std::size_t i = 0; i < N; ++i) {
        if (detail::to_lower(names[i]) == lower) return i;
    }
    return std::nullopt;
}

const std::set<std::string> kAuxiliaries{"is",  "are", "was",  "were", "did",  "does", "do",
                                         "can", "has", "have", "had",  "could", "will", "would"};
const std::set<std::string> kBuiltinComparatives{"than", "after", "before"};

// Words ending in -est that are not superlatives.
const std::set<std::string> kNotSuperlative{
    "interest", "forest",  "rest",    "west",    "test",    "guest",    "honest",  "modest",  "contest",
    "request",  "protest", "nest",    "chest",   "pest",    "quest",    "harvest", "suggest", "manifest",
    "arrest",   "invest",  "digest",  "everest", "earnest", "conquest", "inquest", "priest",  "midwest",
    "bucharest", "budapest", "attest", "detest", "unrest", "northwest", "southwest", "lest", "jest", "vest",
    "zest", "crest", "behest", "tempest", "interests", "forests"};

const std::set<std::string> kPersonHeads{"person",  "people",   "actor",  "actors",  "actress", "writer",
                                         "writers", "author",   "authors", "player", "players", "scientist",
                                         "president", "king",   "queen",  "singer",  "singers", "politician",
                                         "politicians", "musician", "musicians", "artist", "artists"};
const std::set<std::string> kLocationHeads{"city",    "cities", "country", "countries", "place",  "places",
                                           "river",   "rivers", "state",   "states",    "capital", "mountain",
                                           "mountains", "lake", "lakes",   "island",    "islands", "continent",
                                           "region",  "town",   "towns",   "empire",    "borough", "boroughs"};
const std::set<std::string> kOrganizationHeads{"company", "companies", "organization", "organizations",
                                               "party",   "parties",   "team",         "teams",
                                               "band",    "bands",     "university",   "universities"};
const std::set<std::string> kDateHeads{"year", "years", "day", "days", "date", "century", "month"};

bool is_ascii_punct(unsigned char c) { return c < 0x80 && std::ispunct(c) != 0; }

bool starts_with_pair(const std::vector<std::string>& w, std::string_view a, std::string_view b) {
    return w.size() >= 2 && w[0] == a && w[1] == b;
}

bool is_year(const std::string& t) {
    if (t.size() != 4 || !std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); })) {
        return false;
    }
    const int y = std::stoi(t);
    return y >= 1000 && y <= 2099;
}

bool is_plural(const std::string& w) { return w.size() > 3 && w.back() == 's' && w[w.size() - 2] != 's'; }

}  // namespace

std::string_view to_string(QuestionType v) { return kQuestionTypeNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(ResourceType v) { return kResourceTypeNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(WhType v) { return kWhTypeNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(EntityType v) { return kEntityTypeNames[static_cast<std::size_t>(v)]; }

std::optional<QuestionType> parse_question_type(std::string_view s) {
    if (auto i = find_name(kQuestionTypeNames, s)) return static_cast<QuestionType>(*i);
    // QALD answer types without a direct counterpart denote single resources.
    const std::string lower = detail::to_lower(detail::trim(s));
    if (lower == "date" || lower == "string" || lower == "uri") return QuestionType::Resource;
    return std::nullopt;
}

std::optional<ResourceType> parse_resource_type(std::string_view s) {
    if (auto i = find_name(kResourceTypeNames, s)) return static_cast<ResourceType>(*i);
    const std::string lower = detail::to_lower(detail::trim(s));
    if (lower == "organisation") return ResourceType::Organization;
    if (lower == "place") return ResourceType::Location;
    if (lower == "misc.") return ResourceType::Misc;
    return std::nullopt;
}

std::optional<EntityType> parse_entity_type(std::string_view s) {
    if (auto i = find_name(kEntityTypeNames, s)) return static_cast<EntityType>(*i);
    const std::string lower = detail::to_lower(detail::trim(s));
    if (lower == "place") return EntityType::Location;
    if (lower == "organisation") return EntityType::Organization;
    return std::nullopt;
}

ResourceType majority_resource_type(const std::vector<ResourceType>& entries) {
    std::array<std::size_t, kResourceTypeCount> counts{};
    for (auto e : entries) ++counts[static_cast<std::size_t>(e)];
    const auto best = std::max_element(counts.begin(), counts.end());  // first maximum
    return static_cast<ResourceType>(best - counts.begin());
}

// ---------------------------------------------------------------------------

std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        std::string_view chunk = text.substr(i, j - i);
        i = j;
        while (!chunk.empty() && is_ascii_punct(static_cast<unsigned char>(chunk.front()))) chunk.remove_prefix(1);
        std::string word = detail::to_lower(chunk);
        // Trailing punctuation and possessives: "Obama's" -> "obama", "U.S." -> "u.s".
        for (bool changed = true; changed && !word.empty();) {
            changed = false;
            while (!word.empty() && is_ascii_punct(static_cast<unsigned char>(word.back()))) {
                word.pop_back();
                changed = true;
            }
            if (word.size() > 2 && word.ends_with("'s")) {
                word.resize(word.size() - 2);
                changed = true;
            } else if (word.size() > 4 && word.ends_with("\xE2\x80\x99s")) {
                word.resize(word.size() - 4);
                changed = true;
            }
        }
        if (!word.empty()) words.push_back(std::move(word));
    }
    return words;
}

void Gazetteer::add_entity(std::string_view surface, EntityType type) {
    const auto words = split_words(surface);
    if (words.empty()) throw DataError("gazetteer entry with empty surface form");
    std::string key;
    for (const auto& w : words) key += (key.empty() ? "" : " ") + w;
    if (!entities_.emplace(key, type).second) {
        throw DataError("gazetteer: duplicate surface form '" + key + "'");
    }
    longest_ = std::max(longest_, words.size());
}

void Gazetteer::add_comparative(std::string_view word) { comparatives_.insert(detail::to_lower(detail::trim(word))); }
void Gazetteer::add_superlative(std::string_view word) { superlatives_.insert(detail::to_lower(detail::trim(word))); }

std::optional<EntityType> Gazetteer::lookup(const std::string& normalized) const {
    const auto it = entities_.find(normalized);
    if (it == entities_.end()) return std::nullopt;
    return it->second;
}

bool Gazetteer::is_comparative(const std::string& token) const {
    return kBuiltinComparatives.count(token) != 0 || comparatives_.count(token) != 0;
}

bool Gazetteer::is_superlative(const std::string& token) const {
    if (superlatives_.count(token) != 0) return true;
    if (token.find(' ') != std::string::npos) return false;
    return token.size() >= 6 && token.ends_with("est") && kNotSuperlative.count(token) == 0 &&
           std::all_of(token.begin(), token.end(), [](unsigned char c) { return std::isalpha(c); });
}

nlohmann::json Gazetteer::to_json() const {
    nlohmann::json entities = nlohmann::json::array();
    for (const auto& [surface, type] : entities_) entities.push_back({{"surface", surface}, {"type", to_string(type)}});
    return {{"entities", std::move(entities)}, {"comparatives", comparatives_}, {"superlatives", superlatives_}};
}

Gazetteer parse_gazetteer(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(std::string("gazetteer JSON parse error: ") + e.what());
    }
    if (!doc.is_object()) throw DataError("gazetteer must be a JSON object");
    Gazetteer g;
    const auto entities = doc.value("entities", nlohmann::json::array());
    for (std::size_t i = 0; i < entities.size(); ++i) {
        const auto& e = entities[i];
        if (!e.is_object() || !e.contains("surface") || !e.contains("type") || !e["surface"].is_string() ||
            !e["type"].is_string()) {
            throw DataError("gazetteer entity " + std::to_string(i) + ": expected {surface, type}");
        }
        const auto type = parse_entity_type(e["type"].get<std::string>());
        if (!type) throw DataError("gazetteer entity " + std::to_string(i) + ": unknown type " + e["type"].dump());
        g.add_entity(e["surface"].get<std::string>(), *type);
    }
    for (const auto& w : doc.value("comparatives", nlohmann::json::array())) g.add_comparative(w.get<std::string>());
    for (const auto& w : doc.value("superlatives", nlohmann::json::array())) g.add_superlative(w.get<std::string>());
    return g;
}

Gazetteer load_gazetteer(const std::filesystem::path& path) {
    const std::string content = read_file(path);
    try {
        return parse_gazetteer(content);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::vector<Token> tokenize_entities(std::string_view text, const Gazetteer& gazetteer) {
    const auto words = split_words(text);
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < words.size()) {
        std::size_t matched = 0;
        std::optional<EntityType> type;
        const std::size_t max_len = std::min(gazetteer.longest_entry(), words.size() - i);
        for (std::size_t len = max_len; len >= 1 && matched == 0; --len) {
            std::string key = words[i];
            for (std::size_t k = 1; k < len; ++k) key += " " + words[i + k];
            if (auto t = gazetteer.lookup(key)) {
                matched = len;
                type = t;
                tokens.push_back({std::move(key), type});
            }
        }
        if (matched == 0) {
            tokens.push_back({words[i], std::nullopt});
            matched = 1;
        }
        i += matched;
    }
    return tokens;
}

std::vector<std::string> tokenize_merged(std::string_view text, const Gazetteer& gazetteer) {
    std::vector<std::string> out;
    for (auto& t : tokenize_entities(text, gazetteer)) out.push_back(std::move(t.text));
    return out;
}

WhType classify_wh(const std::vector<std::string>& w) {
    if (w.empty()) return WhType::Other;
    if (starts_with_pair(w, "in", "which") || starts_with_pair(w, "in", "what")) return WhType::InWhich;
    if (starts_with_pair(w, "give", "me") || starts_with_pair(w, "show", "me")) return WhType::Ask;
    const std::string& first = w[0];
    if (kAuxiliaries.count(first)) return WhType::Ask;
    if (first == "who" || first == "whom" || first == "whose") return WhType::Who;
    if (first == "which") return WhType::Which;
    if (first == "how") return WhType::How;
    if (first == "what") return WhType::What;
    if (first == "when") return WhType::When;
    if (first == "where") return WhType::Where;
    // Preposition-led questions ("To which party", "On which day").
    if (w.size() >= 2) {
        if (w[1] == "which" || w[1] == "whom") return w[1] == "which" ? WhType::Which : WhType::Who;
        if (w[1] == "what") return WhType::What;
    }
    return WhType::Other;
}

namespace {

// First non-entity token after the wh-word, e.g. "city" in "In which city ..."
// or "players" in "Which [New York Nicks] players ...".
std::optional<std::string> head_noun(const std::vector<Token>& t, WhType wh) {
    std::size_t pos = 0;
    if (wh == WhType::InWhich) {
        pos = 2;
    } else if (wh == WhType::Which || wh == WhType::What) {
        pos = (t.size() >= 2 && (t[1].text == "which" || t[1].text == "what")) ? 2 : 1;
    } else {
        return std::nullopt;
    }
    while (pos < t.size() && t[pos].entity) ++pos;
    if (pos >= t.size()) return std::nullopt;
    return t[pos].text;
}

bool boolean_question(const std::vector<std::string>& w) { return !w.empty() && kAuxiliaries.count(w[0]) != 0; }

bool how_quantity(const std::vector<std::string>& w) {
    return starts_with_pair(w, "how", "many") || starts_with_pair(w, "how", "much");
}

QuestionType guess_question_type(const std::vector<std::string>& w, const std::vector<Token>& tokens, WhType wh) {
    if (boolean_question(w)) return QuestionType::Boolean;
    if (how_quantity(w)) return QuestionType::Number;
    if (starts_with_pair(w, "give", "me") || starts_with_pair(w, "show", "me")) return QuestionType::List;
    if (auto head = head_noun(tokens, wh); head && is_plural(*head)) return QuestionType::List;
    return QuestionType::Resource;
}

ResourceType guess_resource_type(const std::vector<std::string>& w, const std::vector<Token>& tokens, WhType wh) {
    if (boolean_question(w)) return ResourceType::Boolean;
    if (how_quantity(w)) return ResourceType::Number;
    switch (wh) {
        case WhType::Who: return ResourceType::Person;
        case WhType::Where:
        case WhType::InWhich: return ResourceType::Location;
        case WhType::When: return ResourceType::Date;
        default: break;
    }
    if (auto head = head_noun(tokens, wh)) {
        if (kPersonHeads.count(*head)) return ResourceType::Person;
        if (kLocationHeads.count(*head)) return ResourceType::Location;
        if (kOrganizationHeads.count(*head)) return ResourceType::Organization;
        if (kDateHeads.count(*head)) return ResourceType::Date;
    }
    return ResourceType::Misc;
}

std::optional<ResourceType> annotated_resource_type(const std::string& annotation) {
    std::vector<ResourceType> entries;
    for (auto part : detail::split(annotation, ',')) {
        if (detail::trim(part).empty()) continue;
        const auto t = parse_resource_type(part);
        if (!t) return std::nullopt;
        entries.push_back(*t);
    }
    if (entries.empty()) return std::nullopt;
    return majority_resource_type(entries);
}

void flag_numeric_entities(std::string_view text, QuestionFeatures& f, const std::vector<std::string>& words) {
    const auto set = [&](EntityType t) { f.entity_flags[static_cast<std::size_t>(t)] = true; };
    if (text.find('%') != std::string_view::npos) set(EntityType::Percent);
    for (std::size_t i = 0; i < text.size(); ++i) {
        const bool currency = text[i] == '$' || text.substr(i, 2) == "\xC2\xA3" || text.substr(i, 3) == "\xE2\x82\xAC";
        if (currency) set(EntityType::Money);
    }
    for (const auto& w : words) {
        if (w == "percent") set(EntityType::Percent);
        if (w == "dollars" || w == "euros" || w == "usd" || w == "eur") set(EntityType::Money);
        if (is_year(w)) set(EntityType::Date);
    }
}

}  // namespace

QuestionFeatures extract(const QuestionRecord& question, const Gazetteer& gazetteer) {
    QuestionFeatures f;
    const auto words = split_words(question.text);
    const auto tokens = tokenize_entities(question.text, gazetteer);

    f.wh_type = classify_wh(words);
    f.token_count = std::max<int>(1, static_cast<int>(tokens.size()));

    f.question_type = guess_question_type(words, tokens, f.wh_type);
    if (const auto& a = question.annotations.question_type) {
        if (auto t = parse_question_type(*a)) f.question_type = *t;
    }
    f.query_resource_type = guess_resource_type(words, tokens, f.wh_type);
    if (const auto& a = question.annotations.query_resource_type) {
        if (auto t = annotated_resource_type(*a)) f.query_resource_type = *t;
    }

    for (const auto& t : tokens) {
        if (t.entity) {
            f.entity_flags[static_cast<std::size_t>(*t.entity)] = true;
            continue;
        }
        if (gazetteer.is_comparative(t.text)) f.comparative = true;
        if (gazetteer.is_superlative(t.text)) f.superlative = true;
    }
    flag_numeric_entities(question.text, f, words);
    return f;
}

// ---------------------------------------------------------------------------

std::string_view group_name(FeatureGroup g) { return kGroupNames[static_cast<std::size_t>(g)]; }

std::optional<FeatureGroup> parse_group(std::string_view name) {
    const std::string wanted = detail::to_lower(detail::trim(name));
    for (std::size_t i = 0; i < kFeatureGroupCount; ++i) {
        if (detail::to_lower(kGroupNames[i]) == wanted) return static_cast<FeatureGroup>(i);
    }
    return std::nullopt;
}

const std::vector<FeatureGroup>& all_groups() {
    static const std::vector<FeatureGroup> groups = [] {
        std::vector<FeatureGroup> g;
        for (std::size_t i = 0; i < kFeatureGroupCount; ++i) g.push_back(static_cast<FeatureGroup>(i));
        return g;
    }();
    return groups;
}

std::vector<FeatureGroup> parse_group_list(std::string_view list) {
    std::set<FeatureGroup> chosen;
    if (detail::trim(list) == "all") return all_groups();
    for (auto part : detail::split(list, ',')) {
        if (detail::trim(part).empty()) continue;
        const auto g = parse_group(part);
        if (!g) throw ParamError("unknown feature group '" + std::string(detail::trim(part)) + "'");
        chosen.insert(*g);
    }
    if (chosen.empty()) throw ParamError("empty feature-group selection");
    return {chosen.begin(), chosen.end()};
}

std::string format_group_list(const std::vector<FeatureGroup>& groups) {
    std::string out;
    for (auto g : groups) out += (out.empty() ? "" : ",") + std::string(group_name(g));
    return out;
}

std::size_t group_width(FeatureGroup g) {
    switch (g) {
        case FeatureGroup::QT: return kQuestionTypeCount;
        case FeatureGroup::QRT: return kResourceTypeCount;
        case FeatureGroup::QW: return kWhTypeCount;
        default: return 1;
    }
}

EncodingSchema standard_schema() { return {"qameta.features.v1", kQuestionTypeCount, kResourceTypeCount, kWhTypeCount}; }

FeatureVector encode(const QuestionFeatures& f, const EncodingSchema& schema) {
    if (schema.question_type_width != kQuestionTypeCount || schema.resource_type_width != kResourceTypeCount ||
        schema.wh_type_width != kWhTypeCount) {
        throw ParamError("encoding schema '" + schema.id + "' does not cover the feature enums");
    }
    FeatureVector v;
    v.schema_id = schema.id;
    v.groups = all_groups();
    v.slots.reserve(30);
    const auto one_hot = [&](std::size_t width, std::size_t index) {
        for (std::size_t i = 0; i < width; ++i) v.slots.push_back(i == index ? 1.0 : 0.0);
    };
    one_hot(kQuestionTypeCount, static_cast<std::size_t>(f.question_type));
    one_hot(kResourceTypeCount, static_cast<std::size_t>(f.query_resource_type));
    one_hot(kWhTypeCount, static_cast<std::size_t>(f.wh_type));
    v.slots.push_back(static_cast<double>(f.token_count));
    v.slots.push_back(f.comparative ? 1.0 : 0.0);
    v.slots.push_back(f.superlative ? 1.0 : 0.0);
    for (bool flag : f.entity_flags) v.slots.push_back(flag ? 1.0 : 0.0);
    return v;
}

FeatureVector restrict(const FeatureVector& vector, const std::vector<FeatureGroup>& selection) {
    if (selection.empty()) throw ParamError("empty feature-group selection");
    for (auto g : selection) {
        if (std::find(vector.groups.begin(), vector.groups.end(), g) == vector.groups.end()) {
            throw ParamError("feature group '" + std::string(group_name(g)) + "' not present in vector");
        }
    }
    FeatureVector out;
    out.schema_id = vector.schema_id;
    std::size_t offset = 0;
    for (auto g : vector.groups) {
        const std::size_t w = group_width(g);
        if (std::find(selection.begin(), selection.end(), g) != selection.end()) {
            out.groups.push_back(g);
            out.slots.insert(out.slots.end(), vector.slots.begin() + static_cast<std::ptrdiff_t>(offset),
                             vector.slots.begin() + static_cast<std::ptrdiff_t>(offset + w));
        }
        offset += w;
    }
    if (offset != vector.slots.size()) throw ParamError("feature vector width does not match its groups");
    return out;
}

std::vector<std::string> slot_names(const std::vector<FeatureGroup>& groups) {
    std::vector<std::string> names;
    for (auto g : groups) {
        switch (g) {
            case FeatureGroup::QT:
                for (auto n : kQuestionTypeNames) names.push_back("QT=" + std::string(n));
                break;
            case FeatureGroup::QRT:
                for (auto n : kResourceTypeNames) names.push_back("QRT=" + std::string(n));
                break;
            case FeatureGroup::QW:
                for (auto n : kWhTypeNames) names.push_back("QW=" + std::string(n));
                break;
            default: names.emplace_back(group_name(g));
        }
    }
    return names;
}

std::string token_bucket(int token_count) {
    if (token_count <= 5) return "<=5";
    if (token_count <= 8) return "6-8";
    if (token_count <= 11) return "9-11";
    return ">=12";
}

std::string group_state(const QuestionFeatures& f, FeatureGroup g) {
    const auto flag = [](bool b) { return std::string(b ? "1" : "0"); };
    switch (g) {
        case FeatureGroup::QT: return std::string(to_string(f.question_type));
        case FeatureGroup::QRT: return std::string(to_string(f.query_resource_type));
        case FeatureGroup::QW: return std::string(to_string(f.wh_type));
        case FeatureGroup::Tokens: return token_bucket(f.token_count);
        case FeatureGroup::Comp: return flag(f.comparative);
        case FeatureGroup::Sup: return flag(f.superlative);
        case FeatureGroup::Pers: return flag(f.has_entity(EntityType::Person));
        case FeatureGroup::Money: return flag(f.has_entity(EntityType::Money));
        case FeatureGroup::Loc: return flag(f.has_entity(EntityType::Location));
        case FeatureGroup::Percent: return flag(f.has_entity(EntityType::Percent));
        case FeatureGroup::Org: return flag(f.has_entity(EntityType::Organization));
        case FeatureGroup::Date: return flag(f.has_entity(EntityType::Date));
        case FeatureGroup::Misc: return flag(f.has_entity(EntityType::Misc));
    }
    return {};
}

}  // namespace qameta
