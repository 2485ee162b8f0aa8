#include "qameta/selection.hpp"

#include <algorithm>

#include "qameta/error.hpp"
#include "qameta/ranking.hpp"

namespace qameta {

std::size_t argmax_with_priority(std::span<const double> scores, std::span<const double> priority,
                                 std::size_t fallback) {
    if (scores.empty()) return fallback;
    if (std::all_of(scores.begin(), scores.end(), [](double s) { return s == 0.0; })) return fallback;
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] > scores[best]) {
            best = i;
        } else if (scores[i] == scores[best] && !priority.empty() && priority[i] > priority[best]) {
            best = i;
        }
    }
    return best;
}

std::vector<double> question_vector(const QuestionRecord& question, const Gazetteer& gazetteer,
                                    const std::vector<FeatureGroup>& groups) {
    return restrict(encode(extract(question, gazetteer)), groups).slots;
}

MetaModel train_metamodel(Method method, const MethodParams& params, const std::vector<FeatureGroup>& groups,
                          const PerformanceMatrix& matrix, const std::vector<QuestionId>& train_ids,
                          const Matrix& train_vectors, std::uint64_t seed) {
    if (train_ids.empty()) throw ParamError("cannot train a meta model without questions");
    if (train_ids.size() != train_vectors.size()) throw ParamError("training ids and vectors differ in length");
    TrainingSet data;
    data.X = train_vectors;
    for (QuestionId id : train_ids) {
        data.Y.push_back(derive_labels(matrix, id));
        data.f1.push_back(matrix.row(id));
    }
    MetaModel meta{fit(method, data, params, seed), standard_schema().id, groups, matrix.systems(),
                   matrix.column_means(train_ids), {}, seed};
    const auto& means = meta.training_mean_f1;
    meta.policy.fallback = static_cast<std::size_t>(std::max_element(means.begin(), means.end()) - means.begin());
    return meta;
}

MetaModel train_metamodel(Method method, const MethodParams& params, const std::vector<FeatureGroup>& groups,
                          const Dataset& dataset, const std::vector<QuestionId>& train_ids, const Gazetteer& gazetteer,
                          std::uint64_t seed) {
    Matrix vectors;
    for (QuestionId id : train_ids) vectors.push_back(question_vector(dataset.question(id), gazetteer, groups));
    return train_metamodel(method, params, groups, dataset.matrix, train_ids, vectors, seed);
}

std::size_t select_from_scores(const MetaModel& meta, std::span<const double> confidences) {
    if (confidences.size() != meta.systems.size()) {
        throw ParamError("expected " + std::to_string(meta.systems.size()) + " confidences, got " +
                         std::to_string(confidences.size()));
    }
    if (meta.policy.tie_break == TieBreak::LowestIndex) {
        return argmax_with_priority(confidences, {}, meta.policy.fallback);
    }
    return argmax_with_priority(confidences, meta.training_mean_f1, meta.policy.fallback);
}

std::size_t select(const MetaModel& meta, const QuestionRecord& question, const Gazetteer& gazetteer) {
    const auto x = question_vector(question, gazetteer, meta.groups);
    return select_from_scores(meta, meta.model.predict(x));
}

OracleChoice oracle_select(const PerformanceMatrix& matrix, QuestionId question_id) {
    const auto& row = matrix.row(question_id);
    const auto best = std::max_element(row.begin(), row.end());
    return {static_cast<std::size_t>(best - row.begin()), *best};
}

double oracle_mean(const PerformanceMatrix& matrix) {
    if (matrix.empty()) return 0.0;
    double sum = 0.0;
    for (QuestionId id : matrix.ids()) sum += oracle_select(matrix, id).f1;
    return sum / static_cast<double>(matrix.size());
}

double selection_f1(const PerformanceMatrix& matrix, QuestionId question_id, std::size_t chosen_system) {
    return matrix.score(question_id, chosen_system);
}

}  // namespace qameta
