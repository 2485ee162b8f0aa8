#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "qameta/dataset.hpp"
#include "qameta/features.hpp"
#include "qameta/multilabel.hpp"
#include "qameta/selection.hpp"

namespace qameta {

enum class Protocol { CV10, LOO, Full };

std::string_view to_string(Protocol p);
std::optional<Protocol> parse_protocol(std::string_view name);

/// Questions with their full 30-slot encodings, computed once per dataset.
struct PreparedDataset {
    std::vector<QuestionId> ids;
    std::map<QuestionId, FeatureVector> vectors;
    PerformanceMatrix matrix;

    Matrix restricted(const std::vector<QuestionId>& ids, const std::vector<FeatureGroup>& groups) const;
};

PreparedDataset prepare(const Dataset& dataset, const Gazetteer& gazetteer);

/// Called once per fold before training; must be safe to call from several threads.
using FoldObserver = std::function<void(std::size_t fold, const std::vector<QuestionId>& train,
                                        const std::vector<QuestionId>& test)>;

struct EvalConfig {
    Method method = Method::PSt;
    MethodParams params;
    std::vector<FeatureGroup> groups = all_groups();
    std::uint64_t seed = 42;
    std::size_t folds = 10;
    unsigned threads = 0;  // 0: hardware concurrency
    FoldObserver observer;
};

struct QuestionResult {
    QuestionId id = 0;
    std::size_t fold = 0;
    std::size_t chosen = 0;
    double f1 = 0.0;
};

struct EvaluationReport {
    Protocol protocol = Protocol::Full;
    Method method = Method::PSt;
    MethodParams params;
    std::vector<FeatureGroup> groups;
    std::uint64_t seed = 0;
    std::vector<double> fold_scores;
    std::vector<QuestionResult> per_question;  // dataset order
    double aggregate = 0.0;
};

/// Seeded shuffle, then contiguous slices whose sizes differ by at most one.
std::vector<std::vector<QuestionId>> make_folds(const std::vector<QuestionId>& ids, std::size_t folds,
                                                std::uint64_t seed);

EvaluationReport evaluate_cv(const PreparedDataset& data, const EvalConfig& config);
/// n-fold cross-validation with n = number of questions.
EvaluationReport evaluate_loo(const PreparedDataset& data, const EvalConfig& config);
EvaluationReport evaluate_full(const PreparedDataset& data, const EvalConfig& config);
EvaluationReport evaluate(Protocol protocol, const PreparedDataset& data, const EvalConfig& config);

enum class SearchMode { Exhaustive, Listed };

struct SubsetScore {
    std::vector<FeatureGroup> groups;
    double score = 0.0;
};

struct SubsetSearchReport {
    std::vector<SubsetScore> ranked;  // exhaustive: descending score, then fewer groups, then lexicographic; listed: input order
    SubsetScore best() const { return ranked.front(); }
};

/// Feature combinations reported for the pruned-sets-with-threshold router.
const std::vector<std::vector<FeatureGroup>>& reference_combinations();

/// Full-train evaluation of every non-empty subset of the 13 groups, or of `listed`.
SubsetSearchReport subset_search(const PreparedDataset& data, const EvalConfig& config, SearchMode mode,
                                 const std::vector<std::vector<FeatureGroup>>& listed = {});

struct ComparisonTable {
    std::vector<std::string> systems;
    std::vector<double> single_system_means;
    double oracle = 0.0;
    std::vector<std::pair<std::string, double>> metasystems;  // label, aggregate
};

/// Throws ParamError on an empty list and DataError when a report covers different questions.
ComparisonTable compare_report(const PerformanceMatrix& matrix, const std::vector<EvaluationReport>& reports);

std::string report_label(const EvaluationReport& report);

std::string report_csv(const std::vector<EvaluationReport>& reports, const std::vector<std::string>& systems);
std::string boxplot_csv(const std::vector<EvaluationReport>& reports);
std::string summary_markdown(const ComparisonTable& table, const std::vector<EvaluationReport>& reports);
std::string subset_search_csv(const SubsetSearchReport& report);
std::string subset_search_markdown(const SubsetSearchReport& report, std::size_t top);

}  // namespace qameta
