#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qameta/dataset.hpp"
#include "qameta/features.hpp"
#include "qameta/multilabel.hpp"

namespace qameta {

enum class TieBreak { TrainingMeanF1, LowestIndex };

struct SelectionPolicy {
    TieBreak tie_break = TieBreak::TrainingMeanF1;
    std::size_t fallback = 0;  // used when every confidence is zero
};

/// A trained router: feature pipeline, multi-label model and selection policy.
struct MetaModel {
    MultiLabelModel model;
    std::string schema_id;
    std::vector<FeatureGroup> groups;
    std::vector<std::string> systems;
    std::vector<double> training_mean_f1;
    SelectionPolicy policy;
    std::uint64_t seed = 0;
};

/// Encoded and restricted feature vector for one question.
std::vector<double> question_vector(const QuestionRecord& question, const Gazetteer& gazetteer,
                                    const std::vector<FeatureGroup>& groups);

/// Trains on the given questions. The fallback is the system with the highest
/// training mean F1 (lowest index on ties).
MetaModel train_metamodel(Method method, const MethodParams& params, const std::vector<FeatureGroup>& groups,
                          const Dataset& dataset, const std::vector<QuestionId>& train_ids, const Gazetteer& gazetteer,
                          std::uint64_t seed);

/// Same, from precomputed restricted vectors aligned with train_ids.
MetaModel train_metamodel(Method method, const MethodParams& params, const std::vector<FeatureGroup>& groups,
                          const PerformanceMatrix& matrix, const std::vector<QuestionId>& train_ids,
                          const Matrix& train_vectors, std::uint64_t seed);

/// Argmax over confidences with the meta model's tie-break and fallback.
std::size_t select_from_scores(const MetaModel& meta, std::span<const double> confidences);

std::size_t select(const MetaModel& meta, const QuestionRecord& question, const Gazetteer& gazetteer);

struct OracleChoice {
    std::size_t system = 0;
    double f1 = 0.0;
};

/// Best system for a question; ties go to the lowest index.
OracleChoice oracle_select(const PerformanceMatrix& matrix, QuestionId question_id);
double oracle_mean(const PerformanceMatrix& matrix);

double selection_f1(const PerformanceMatrix& matrix, QuestionId question_id, std::size_t chosen_system);

}  // namespace qameta
