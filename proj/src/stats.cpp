#include "qameta/stats.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "qameta/error.hpp"
#include "text_util.hpp"

namespace qameta {

ContingencyTable::ContingencyTable(std::vector<std::vector<std::int64_t>> counts, std::vector<std::string> row_labels,
                                   std::vector<std::string> col_labels)
    : counts_(std::move(counts)), row_labels_(std::move(row_labels)), col_labels_(std::move(col_labels)) {
    const std::size_t J = cols();
    for (const auto& r : counts_) {
        if (r.size() != J) throw ParamError("contingency table rows differ in length");
        for (auto c : r) {
            if (c < 0) throw ParamError("contingency table counts must be non-negative");
        }
    }
    row_margins_.assign(rows(), 0);
    col_margins_.assign(J, 0);
    for (std::size_t i = 0; i < rows(); ++i) {
        for (std::size_t j = 0; j < J; ++j) {
            row_margins_[i] += counts_[i][j];
            col_margins_[j] += counts_[i][j];
            n_ += counts_[i][j];
        }
    }
}

bool ContingencyTable::degenerate() const {
    if (rows() < 2 || cols() < 2) return true;
    const auto zero = [](std::int64_t m) { return m == 0; };
    return std::any_of(row_margins_.begin(), row_margins_.end(), zero) ||
           std::any_of(col_margins_.begin(), col_margins_.end(), zero);
}

ContingencyTable ContingencyTable::transposed() const {
    std::vector<std::vector<std::int64_t>> t(cols(), std::vector<std::int64_t>(rows()));
    for (std::size_t i = 0; i < rows(); ++i) {
        for (std::size_t j = 0; j < cols(); ++j) t[j][i] = counts_[i][j];
    }
    return ContingencyTable(std::move(t), col_labels_, row_labels_);
}

ContingencyTable build_table(const PerformanceMatrix& matrix, std::size_t system,
                             const std::map<QuestionId, std::string>& feature_values) {
    if (matrix.empty()) throw DegenerateTableError("contingency table over an empty matrix");
    if (system >= matrix.system_count()) throw DataError("system index out of range");
    std::set<std::string> states;
    for (QuestionId id : matrix.ids()) {
        const auto it = feature_values.find(id);
        if (it == feature_values.end()) throw DataError("no feature state for question " + std::to_string(id));
        states.insert(it->second);
    }
    const std::vector<std::string> cols(states.begin(), states.end());
    std::vector<std::vector<std::int64_t>> counts(2, std::vector<std::int64_t>(cols.size(), 0));
    for (QuestionId id : matrix.ids()) {
        const std::size_t row = matrix.score(id, system) > 0.0 ? 0 : 1;
        const auto col = std::lower_bound(cols.begin(), cols.end(), feature_values.at(id)) - cols.begin();
        ++counts[row][static_cast<std::size_t>(col)];
    }
    return ContingencyTable(std::move(counts), {"can answer", "cannot answer"}, cols);
}

double chi_squared(const ContingencyTable& table) {
    if (table.rows() == 0 || table.cols() == 0) throw DegenerateTableError("empty contingency table");
    const auto& rm = table.row_margins();
    const auto& cm = table.col_margins();
    for (auto m : rm) {
        if (m == 0) throw DegenerateTableError("contingency table has a zero row margin");
    }
    for (auto m : cm) {
        if (m == 0) throw DegenerateTableError("contingency table has a zero column margin");
    }
    const double n = static_cast<double>(table.n());
    double sum = 0.0;
    for (std::size_t i = 0; i < table.rows(); ++i) {
        for (std::size_t j = 0; j < table.cols(); ++j) {
            const double ri = static_cast<double>(rm[i]);
            const double cj = static_cast<double>(cm[j]);
            const double diff = static_cast<double>(table.count(i, j)) - ri * cj / n;
            sum += diff * diff / (ri * cj);
        }
    }
    return n * sum;
}

AssociationResult cramers_v(const ContingencyTable& table) {
    const std::size_t k = std::min(table.rows(), table.cols());
    if (k < 2) throw DegenerateTableError("Cramer's V needs at least two rows and two columns");
    AssociationResult r;
    r.chi_squared = chi_squared(table);
    r.k = k;
    const double v = std::sqrt(r.chi_squared / (static_cast<double>(table.n()) * static_cast<double>(k - 1)));
    r.v = std::clamp(v, 0.0, 1.0);
    return r;
}

std::optional<double> AssociationProfile::mean_v(std::size_t feature) const {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t s = 0; s < systems.size(); ++s) {
        if (const auto& r = cell(s, feature).result) {
            sum += r->v;
            ++count;
        }
    }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
}

AssociationProfile association_profile(const Dataset& dataset, const Gazetteer& gazetteer) {
    AssociationProfile p;
    p.systems = dataset.matrix.systems();
    p.features = all_groups();
    std::map<QuestionId, QuestionFeatures> extracted;
    for (const auto& q : dataset.questions) extracted.emplace(q.id, extract(q, gazetteer));

    for (std::size_t s = 0; s < p.systems.size(); ++s) {
        for (auto g : p.features) {
            AssociationCell cell{p.systems[s], g, std::nullopt, static_cast<std::int64_t>(dataset.matrix.size())};
            if (!dataset.matrix.empty()) {
                std::map<QuestionId, std::string> states;
                for (const auto& [id, f] : extracted) states.emplace(id, group_state(f, g));
                const auto table = build_table(dataset.matrix, s, states);
                if (!table.degenerate()) cell.result = cramers_v(table);
            }
            p.cells.push_back(std::move(cell));
        }
    }
    return p;
}

std::string association_csv(const AssociationProfile& profile) {
    std::string out = "system,feature,v,chi2,n\n";
    for (const auto& c : profile.cells) {
        out += c.system + "," + std::string(group_name(c.feature)) + ",";
        if (c.result) {
            out += detail::format_double(c.result->v) + "," + detail::format_double(c.result->chi_squared);
        } else {
            out += ",";
        }
        out += "," + std::to_string(c.n) + "\n";
    }
    return out;
}

}  // namespace qameta
