#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"

namespace qameta {

using Matrix = std::vector<std::vector<double>>;

struct TreeParams {
    std::optional<int> max_depth;  // unlimited when empty
    int min_samples_split = 2;
};

struct TreeNode {
    int slot = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> distribution;  // class frequencies of the node's samples

    bool leaf() const { return slot < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// CART classification tree; samples with x[slot] <= threshold go left.
class TreeModel {
public:
    TreeModel() = default;
    TreeModel(std::vector<TreeNode> nodes, std::size_t num_classes, std::size_t width, TreeParams params);

    std::vector<double> predict_proba(std::span<const double> x) const;
    /// Most probable class, lowest index on ties.
    std::size_t predict(std::span<const double> x) const;

    std::size_t num_classes() const { return num_classes_; }
    std::size_t width() const { return width_; }
    const std::vector<TreeNode>& nodes() const { return nodes_; }
    const TreeParams& params() const { return params_; }
    int depth() const;
    std::size_t leaf_count() const;

    nlohmann::json to_json() const;
    static TreeModel from_json(const nlohmann::json& j);

    friend bool operator==(const TreeModel& a, const TreeModel& b) {
        return a.nodes_ == b.nodes_ && a.num_classes_ == b.num_classes_ && a.width_ == b.width_;
    }

private:
    std::vector<TreeNode> nodes_;
    std::size_t num_classes_ = 0;
    std::size_t width_ = 0;
    TreeParams params_;
};

/// Grows a tree by Gini impurity reduction. Ties go to the lowest slot, then the
/// lowest threshold. Nodes keep splitting while impure and separable, so with
/// unlimited depth every distinct training vector ends in its own leaf.
/// Class ids must lie in [0, num_classes).
TreeModel fit_tree(const Matrix& X, const std::vector<int>& y, std::size_t num_classes, const TreeParams& params = {},
                   std::uint64_t seed = 0);

}  // namespace qameta
