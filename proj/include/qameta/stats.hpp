#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qameta/dataset.hpp"
#include "qameta/features.hpp"

namespace qameta {

/// Answerability (rows) against feature states (columns).
class ContingencyTable {
public:
    ContingencyTable(std::vector<std::vector<std::int64_t>> counts, std::vector<std::string> row_labels = {},
                     std::vector<std::string> col_labels = {});

    std::size_t rows() const { return counts_.size(); }
    std::size_t cols() const { return counts_.empty() ? 0 : counts_.front().size(); }
    std::int64_t count(std::size_t i, std::size_t j) const { return counts_[i][j]; }
    const std::vector<std::vector<std::int64_t>>& counts() const { return counts_; }
    std::int64_t n() const { return n_; }
    const std::vector<std::int64_t>& row_margins() const { return row_margins_; }
    const std::vector<std::int64_t>& col_margins() const { return col_margins_; }
    const std::vector<std::string>& row_labels() const { return row_labels_; }
    const std::vector<std::string>& col_labels() const { return col_labels_; }

    /// Fewer than two rows or columns, or any zero margin.
    bool degenerate() const;

    ContingencyTable transposed() const;

private:
    std::vector<std::vector<std::int64_t>> counts_;
    std::vector<std::string> row_labels_;
    std::vector<std::string> col_labels_;
    std::vector<std::int64_t> row_margins_;
    std::vector<std::int64_t> col_margins_;
    std::int64_t n_ = 0;
};

struct AssociationResult {
    double chi_squared = 0.0;
    double v = 0.0;
    std::size_t k = 0;
};

/// Rows "can answer" (F1 > 0) and "cannot answer"; one column per observed
/// feature state, in sorted order. Throws DataError on a missing state and
/// DegenerateTableError on an empty matrix.
ContingencyTable build_table(const PerformanceMatrix& matrix, std::size_t system,
                             const std::map<QuestionId, std::string>& feature_values);

/// Pearson statistic, no continuity correction. Throws DegenerateTableError on a zero margin.
double chi_squared(const ContingencyTable& table);

/// Cramer's V with k = min(I, J). Throws DegenerateTableError when undefined.
AssociationResult cramers_v(const ContingencyTable& table);

struct AssociationCell {
    std::string system;
    FeatureGroup feature;
    std::optional<AssociationResult> result;  // nullopt for degenerate tables
    std::int64_t n = 0;
};

struct AssociationProfile {
    std::vector<std::string> systems;
    std::vector<FeatureGroup> features;
    std::vector<AssociationCell> cells;  // system-major

    const AssociationCell& cell(std::size_t system, std::size_t feature) const {
        return cells[system * features.size() + feature];
    }
    /// Mean V of one feature over the systems where it is defined; nullopt if none.
    std::optional<double> mean_v(std::size_t feature) const;
};

AssociationProfile association_profile(const Dataset& dataset, const Gazetteer& gazetteer);

/// CSV with header system,feature,v,chi2,n; degenerate cells leave v and chi2 empty.
std::string association_csv(const AssociationProfile& profile);

}  // namespace qameta
