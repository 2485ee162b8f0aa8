#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qameta {

using QuestionId = std::int64_t;

/// Gold annotations carried by QALD-style files, stored as lowercase enum strings.
struct QuestionAnnotations {
    std::optional<std::string> question_type;        // answertype
    std::optional<std::string> query_resource_type;  // resourcetype
};

struct QuestionRecord {
    QuestionId id = 0;
    std::string text;
    QuestionAnnotations annotations;
};

enum class QuestionFormat { Json, Tsv };

/// Questions in file order. Rejects duplicate ids and blank texts.
std::vector<QuestionRecord> load_questions(const std::filesystem::path& path, QuestionFormat format);
std::vector<QuestionRecord> parse_questions_json(std::string_view content);
std::vector<QuestionRecord> parse_questions_tsv(std::string_view content);

/// Guesses the format from the file extension (.tsv/.txt => TSV, otherwise JSON).
QuestionFormat question_format_for(const std::filesystem::path& path);

using LabelVector = std::vector<bool>;

/// Per-question, per-system F1 scores in [0, 1].
class PerformanceMatrix {
public:
    PerformanceMatrix() = default;
    explicit PerformanceMatrix(std::vector<std::string> systems);

    void add_row(QuestionId id, std::vector<double> scores);

    const std::vector<std::string>& systems() const { return systems_; }
    std::size_t system_count() const { return systems_.size(); }
    std::size_t size() const { return order_.size(); }
    bool empty() const { return order_.empty(); }
    bool contains(QuestionId id) const { return rows_.count(id) != 0; }

    /// Question ids in insertion (file) order.
    const std::vector<QuestionId>& ids() const { return order_; }
    const std::vector<double>& row(QuestionId id) const;
    double score(QuestionId id, std::size_t system) const;
    std::optional<std::size_t> system_index(std::string_view name) const;

    /// Mean F1 per system over the given questions (all questions when empty).
    std::vector<double> column_means(const std::vector<QuestionId>& subset = {}) const;

    /// Restriction to a subset of questions, preserving the subset's order.
    PerformanceMatrix subset(const std::vector<QuestionId>& ids) const;

    friend bool operator==(const PerformanceMatrix& a, const PerformanceMatrix& b) {
        return a.systems_ == b.systems_ && a.order_ == b.order_ && a.rows_ == b.rows_;
    }

private:
    std::vector<std::string> systems_;
    std::vector<QuestionId> order_;
    std::map<QuestionId, std::vector<double>> rows_;
};

PerformanceMatrix load_performance(const std::filesystem::path& path);
PerformanceMatrix parse_performance_csv(std::string_view content);
std::string serialize_performance_csv(const PerformanceMatrix& matrix);

/// labels[i] is true iff the system's F1 on the question is strictly positive.
LabelVector derive_labels(const PerformanceMatrix& matrix, QuestionId question_id);

/// Questions joined with their scores; every matrix row has a question.
struct Dataset {
    std::vector<QuestionRecord> questions;
    PerformanceMatrix matrix;

    const QuestionRecord& question(QuestionId id) const;
};

/// Validates the join. Questions without a matrix row are dropped; matrix rows
/// without a question are an error. Question order follows the matrix.
Dataset join_dataset(std::vector<QuestionRecord> questions, PerformanceMatrix matrix);

std::string read_file(const std::filesystem::path& path);

}  // namespace qameta
