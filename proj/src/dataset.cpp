#include "qameta/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "qameta/error.hpp"
#include "text_util.hpp"

namespace qameta {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

namespace {

std::string question_text(const json& q, std::size_t index) {
    const auto it = q.find("question");
    if (it == q.end()) throw DataError("question element " + std::to_string(index) + ": missing \"question\"");
    if (it->is_string()) return it->get<std::string>();
    if (it->is_array()) {
        for (const auto& entry : *it) {
            if (entry.is_object() && entry.value("language", "") == "en" && entry.contains("string") &&
                entry["string"].is_string()) {
                return entry["string"].get<std::string>();
            }
        }
        throw DataError("question element " + std::to_string(index) + ": no English question string");
    }
    throw DataError("question element " + std::to_string(index) + ": \"question\" must be a string or list");
}

std::optional<std::string> optional_enum(const json& q, const char* key, std::size_t index) {
    const auto it = q.find(key);
    if (it == q.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) {
        throw DataError("question element " + std::to_string(index) + ": \"" + key + "\" must be a string");
    }
    return detail::to_lower(detail::trim(it->get<std::string>()));
}

void check_record(const QuestionRecord& r, std::set<QuestionId>& seen, const std::string& where) {
    if (r.id < 0) throw DataError(where + ": negative question id " + std::to_string(r.id));
    if (detail::trim(r.text).empty()) throw DataError(where + ": empty question text (id " + std::to_string(r.id) + ")");
    if (!seen.insert(r.id).second) throw DataError(where + ": duplicate question id " + std::to_string(r.id));
}

QuestionId parse_id(std::string_view s, const std::string& where) {
    s = detail::trim(s);
    QuestionId id = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), id);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw DataError(where + ": invalid question id '" + std::string(s) + "'");
    }
    return id;
}

}  // namespace

std::vector<QuestionRecord> parse_questions_json(std::string_view content) {
    std::vector<QuestionRecord> out;
    if (detail::trim(content).empty()) return out;
    json doc;
    try {
        doc = json::parse(content);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("question JSON parse error: ") + e.what());
    }
    const json* items = &doc;
    if (doc.is_object()) {
        if (!doc.contains("questions")) throw DataError("question JSON object lacks a \"questions\" array");
        items = &doc["questions"];
    }
    if (!items->is_array()) throw DataError("question JSON must be an array of question objects");

    std::set<QuestionId> seen;
    for (std::size_t i = 0; i < items->size(); ++i) {
        const json& q = (*items)[i];
        const std::string where = "question element " + std::to_string(i);
        if (!q.is_object()) throw DataError(where + ": not an object");
        QuestionRecord r;
        const auto id = q.find("id");
        if (id == q.end()) throw DataError(where + ": missing \"id\"");
        if (id->is_number_integer()) {
            r.id = id->get<QuestionId>();
        } else if (id->is_string()) {
            r.id = parse_id(id->get<std::string>(), where);
        } else {
            throw DataError(where + ": \"id\" must be an integer");
        }
        r.text = question_text(q, i);
        r.annotations.question_type = optional_enum(q, "answertype", i);
        r.annotations.query_resource_type = optional_enum(q, "resourcetype", i);
        check_record(r, seen, where);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<QuestionRecord> parse_questions_tsv(std::string_view content) {
    std::vector<QuestionRecord> out;
    std::set<QuestionId> seen;
    const auto lines = detail::split_lines(content);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string_view line = lines[i];
        if (detail::trim(line).empty()) continue;
        const std::string where = "line " + std::to_string(i + 1);
        const auto tab = line.find('\t');
        if (tab == std::string_view::npos) throw DataError(where + ": expected id<TAB>text");
        QuestionRecord r;
        r.id = parse_id(line.substr(0, tab), where);
        r.text = std::string(detail::trim(line.substr(tab + 1)));
        check_record(r, seen, where);
        out.push_back(std::move(r));
    }
    return out;
}

QuestionFormat question_format_for(const std::filesystem::path& path) {
    const auto ext = detail::to_lower(path.extension().string());
    return (ext == ".tsv" || ext == ".txt") ? QuestionFormat::Tsv : QuestionFormat::Json;
}

std::vector<QuestionRecord> load_questions(const std::filesystem::path& path, QuestionFormat format) {
    const std::string content = read_file(path);
    try {
        return format == QuestionFormat::Json ? parse_questions_json(content) : parse_questions_tsv(content);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------

PerformanceMatrix::PerformanceMatrix(std::vector<std::string> systems) : systems_(std::move(systems)) {
    if (systems_.empty()) throw DataError("performance matrix needs at least one system");
    std::set<std::string> unique(systems_.begin(), systems_.end());
    if (unique.size() != systems_.size()) throw DataError("duplicate system name in performance matrix");
}

void PerformanceMatrix::add_row(QuestionId id, std::vector<double> scores) {
    if (scores.size() != systems_.size()) {
        throw DataError("question " + std::to_string(id) + ": expected " + std::to_string(systems_.size()) +
                        " scores, got " + std::to_string(scores.size()));
    }
    for (double s : scores) {
        if (!(s >= 0.0 && s <= 1.0)) {
            throw DataError("question " + std::to_string(id) + ": score " + std::to_string(s) + " outside [0,1]");
        }
    }
    if (!rows_.emplace(id, std::move(scores)).second) {
        throw DataError("duplicate question id " + std::to_string(id) + " in performance matrix");
    }
    order_.push_back(id);
}

const std::vector<double>& PerformanceMatrix::row(QuestionId id) const {
    const auto it = rows_.find(id);
    if (it == rows_.end()) throw DataError("unknown question id " + std::to_string(id));
    return it->second;
}

double PerformanceMatrix::score(QuestionId id, std::size_t system) const {
    const auto& r = row(id);
    if (system >= r.size()) throw DataError("system index " + std::to_string(system) + " out of range");
    return r[system];
}

std::optional<std::size_t> PerformanceMatrix::system_index(std::string_view name) const {
    const auto it = std::find(systems_.begin(), systems_.end(), name);
    if (it == systems_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - systems_.begin());
}

std::vector<double> PerformanceMatrix::column_means(const std::vector<QuestionId>& subset) const {
    const auto& ids = subset.empty() ? order_ : subset;
    std::vector<double> means(systems_.size(), 0.0);
    if (ids.empty()) return means;
    for (QuestionId id : ids) {
        const auto& r = row(id);
        for (std::size_t s = 0; s < r.size(); ++s) means[s] += r[s];
    }
    for (double& m : means) m /= static_cast<double>(ids.size());
    return means;
}

PerformanceMatrix PerformanceMatrix::subset(const std::vector<QuestionId>& ids) const {
    PerformanceMatrix out(systems_);
    for (QuestionId id : ids) out.add_row(id, row(id));
    return out;
}

PerformanceMatrix parse_performance_csv(std::string_view content) {
    const auto lines = detail::split_lines(content);
    std::size_t first = 0;
    while (first < lines.size() && detail::trim(lines[first]).empty()) ++first;
    if (first == lines.size()) throw DataError("performance CSV: missing header row");

    const auto header = detail::split(lines[first], ',');
    if (header.size() < 2 || detail::trim(header[0]) != "question_id") {
        throw DataError("performance CSV: header must be question_id,<system>,...");
    }
    std::vector<std::string> systems;
    for (std::size_t i = 1; i < header.size(); ++i) systems.emplace_back(detail::trim(header[i]));
    PerformanceMatrix matrix(std::move(systems));

    for (std::size_t li = first + 1; li < lines.size(); ++li) {
        if (detail::trim(lines[li]).empty()) continue;
        const std::string where = "performance CSV line " + std::to_string(li + 1);
        const auto cells = detail::split(lines[li], ',');
        if (cells.size() != header.size()) {
            throw DataError(where + ": ragged row (" + std::to_string(cells.size()) + " cells, header has " +
                            std::to_string(header.size()) + ")");
        }
        const QuestionId id = parse_id(cells[0], where);
        std::vector<double> scores;
        for (std::size_t c = 1; c < cells.size(); ++c) {
            const auto value = detail::parse_double(cells[c]);
            if (!value) throw DataError(where + ": non-numeric cell '" + std::string(cells[c]) + "'");
            if (!(*value >= 0.0 && *value <= 1.0)) {
                throw DataError(where + ": value " + std::string(detail::trim(cells[c])) + " outside [0,1]");
            }
            scores.push_back(*value);
        }
        try {
            matrix.add_row(id, std::move(scores));
        } catch (const DataError& e) {
            throw DataError(where + ": " + e.what());
        }
    }
    return matrix;
}

PerformanceMatrix load_performance(const std::filesystem::path& path) {
    const std::string content = read_file(path);
    try {
        return parse_performance_csv(content);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::string serialize_performance_csv(const PerformanceMatrix& matrix) {
    std::string out = "question_id";
    for (const auto& s : matrix.systems()) out += "," + s;
    out += "\n";
    for (QuestionId id : matrix.ids()) {
        out += std::to_string(id);
        for (double v : matrix.row(id)) out += "," + detail::format_double(v);
        out += "\n";
    }
    return out;
}

LabelVector derive_labels(const PerformanceMatrix& matrix, QuestionId question_id) {
    const auto& r = matrix.row(question_id);
    LabelVector labels(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) labels[i] = r[i] > 0.0;
    return labels;
}

const QuestionRecord& Dataset::question(QuestionId id) const {
    const auto it = std::find_if(questions.begin(), questions.end(), [id](const auto& q) { return q.id == id; });
    if (it == questions.end()) throw DataError("unknown question id " + std::to_string(id));
    return *it;
}

Dataset join_dataset(std::vector<QuestionRecord> questions, PerformanceMatrix matrix) {
    std::map<QuestionId, QuestionRecord> by_id;
    for (auto& q : questions) by_id.emplace(q.id, std::move(q));
    Dataset ds;
    for (QuestionId id : matrix.ids()) {
        auto it = by_id.find(id);
        if (it == by_id.end()) {
            throw DataError("performance matrix row " + std::to_string(id) + " has no matching question");
        }
        ds.questions.push_back(std::move(it->second));
    }
    ds.matrix = std::move(matrix);
    return ds;
}

}  // namespace qameta
