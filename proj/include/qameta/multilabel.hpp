#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qameta/dataset.hpp"
#include "qameta/logistic.hpp"
#include "qameta/tree.hpp"

namespace qameta {

enum class Method { BR, LC, CC, MCC, RT, PS, PSt, RAkELd, RAkELo, CDN };

std::string_view to_string(Method m);
/// Case-insensitive; "pcc" and "pmcc" map to MCC and "rakel" to RAkELo.
std::optional<Method> parse_method(std::string_view name);
const std::vector<Method>& all_methods();

struct MethodParams {
    int prune = 1;                  // PS/PSt: combinations seen <= prune times are pruned
    double threshold = 0.5;         // RT, PSt, CDN
    int k = 3;                      // RAkEL labelset size
    int ensemble = 10;              // MCC chain samples, RAkELo subsets
    std::vector<int> chain_order;   // CC; identity when empty
    int gibbs_iterations = 100;     // CDN
    int burn_in = 10;               // CDN
    TreeParams tree;
    LogisticParams logistic;

    nlohmann::json to_json() const;
    static MethodParams from_json(const nlohmann::json& j);
};

/// Throws ParamError for k < 1, prune < 0, threshold outside [0,1], ensemble < 1,
/// burn_in >= gibbs_iterations, or a chain order that is not a permutation.
void validate(const MethodParams& params, std::size_t label_count);

struct TrainingSet {
    Matrix X;
    std::vector<LabelVector> Y;
    /// Optional per-example system F1 rows; MCC uses them to rank chain orders.
    std::vector<std::vector<double>> f1;
};

/// A multi-class model over a subset of labels in which each observed label
/// combination is one class.
struct LabelPowerset {
    std::vector<int> labels;              // global label indices covered
    std::vector<LabelVector> combos;      // class id -> membership over `labels`
    TreeModel model;
};

class MultiLabelModel {
public:
    Method method() const { return method_; }
    const MethodParams& params() const { return params_; }
    std::size_t label_count() const { return label_count_; }
    std::size_t width() const { return width_; }
    std::uint64_t seed() const { return seed_; }
    const std::vector<int>& chain_order() const { return chain_order_; }
    const std::vector<LabelPowerset>& powersets() const { return powersets_; }
    const std::vector<LogisticModel>& dependency_nodes() const { return nodes_; }

    /// Per-label confidence in [0, 1].
    std::vector<double> predict(std::span<const double> x) const;

    nlohmann::json to_json() const;
    static MultiLabelModel from_json(const nlohmann::json& j);

    /// CDN whose nodes all have zero weights; every marginal is 0.5.
    static MultiLabelModel uninformative_cdn(std::size_t label_count, std::size_t width, const MethodParams& params,
                                             std::uint64_t seed);

    friend MultiLabelModel fit(Method method, const TrainingSet& data, const MethodParams& params, std::uint64_t seed);

private:
    std::vector<double> predict_chain(std::span<const double> x) const;
    std::vector<double> predict_cdn(std::span<const double> x) const;
    std::vector<double> powerset_marginals(std::span<const double> x) const;

    Method method_ = Method::BR;
    MethodParams params_;
    std::size_t label_count_ = 0;
    std::size_t width_ = 0;
    std::uint64_t seed_ = 0;

    std::vector<TreeModel> binary_;         // BR, CC/MCC (chain position order)
    std::vector<int> chain_order_;          // CC/MCC
    std::vector<LabelPowerset> powersets_;  // LC, PS, PSt, RAkELd, RAkELo
    std::optional<TreeModel> ranking_;      // RT: one class per label
    std::vector<LogisticModel> nodes_;      // CDN
};

MultiLabelModel fit(Method method, const TrainingSet& data, const MethodParams& params, std::uint64_t seed);

/// labels[i] = scores[i] >= threshold.
LabelVector predict_set(const MultiLabelModel& model, std::span<const double> x, double threshold);
LabelVector threshold_scores(std::span<const double> scores, double threshold);

/// Training examples as rewritten by pruned-sets: (example index, label set).
/// Pruned examples are replaced by one copy per maximal frequent sub-combination.
std::vector<std::pair<std::size_t, LabelVector>> pruned_set_examples(const std::vector<LabelVector>& Y, int prune);

}  // namespace qameta
