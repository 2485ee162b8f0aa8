#include "qameta/tree.hpp"

#include <algorithm>
#include <numeric>

#include "qameta/error.hpp"

namespace qameta {

TreeModel::TreeModel(std::vector<TreeNode> nodes, std::size_t num_classes, std::size_t width, TreeParams params)
    : nodes_(std::move(nodes)), num_classes_(num_classes), width_(width), params_(params) {}

std::vector<double> TreeModel::predict_proba(std::span<const double> x) const {
    if (x.size() != width_) {
        throw ParamError("tree input width " + std::to_string(x.size()) + " != " + std::to_string(width_));
    }
    std::size_t at = 0;
    while (!nodes_[at].leaf()) {
        const auto& n = nodes_[at];
        at = static_cast<std::size_t>(x[static_cast<std::size_t>(n.slot)] <= n.threshold ? n.left : n.right);
    }
    return nodes_[at].distribution;
}

std::size_t TreeModel::predict(std::span<const double> x) const {
    const auto p = predict_proba(x);
    return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

int TreeModel::depth() const {
    // Children always follow their parent in the node array.
    std::vector<int> d(nodes_.size(), 0);
    int best = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        best = std::max(best, d[i]);
        if (!nodes_[i].leaf()) {
            d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
        }
    }
    return best;
}

std::size_t TreeModel::leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const auto& n) { return n.leaf(); }));
}

nlohmann::json TreeModel::to_json() const {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : nodes_) {
        if (n.leaf()) {
            nodes.push_back({{"p", n.distribution}});
        } else {
            nodes.push_back({{"slot", n.slot}, {"thr", n.threshold}, {"l", n.left}, {"r", n.right}, {"p", n.distribution}});
        }
    }
    nlohmann::json j{{"classes", num_classes_}, {"width", width_}, {"min_samples_split", params_.min_samples_split},
                     {"nodes", std::move(nodes)}};
    j["max_depth"] = params_.max_depth ? nlohmann::json(*params_.max_depth) : nlohmann::json(nullptr);
    return j;
}

TreeModel TreeModel::from_json(const nlohmann::json& j) {
    TreeParams params;
    if (!j.at("max_depth").is_null()) params.max_depth = j.at("max_depth").get<int>();
    params.min_samples_split = j.at("min_samples_split").get<int>();
    std::vector<TreeNode> nodes;
    for (const auto& n : j.at("nodes")) {
        TreeNode node;
        node.distribution = n.at("p").get<std::vector<double>>();
        if (n.contains("slot")) {
            node.slot = n.at("slot").get<int>();
            node.threshold = n.at("thr").get<double>();
            node.left = n.at("l").get<int>();
            node.right = n.at("r").get<int>();
        }
        nodes.push_back(std::move(node));
    }
    const std::size_t classes = j.at("classes").get<std::size_t>();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& n = nodes[i];
        if (n.distribution.size() != classes) throw DataError("tree node distribution has wrong class count");
        if (!n.leaf() && (n.left <= static_cast<int>(i) || n.right <= static_cast<int>(i) ||
                          n.left >= static_cast<int>(nodes.size()) || n.right >= static_cast<int>(nodes.size()))) {
            throw DataError("tree node has invalid child index");
        }
    }
    if (nodes.empty()) throw DataError("tree has no nodes");
    return TreeModel(std::move(nodes), classes, j.at("width").get<std::size_t>(), params);
}

namespace {

using Wide = __int128;

// Split quality sum_c(L_c^2)/nL + sum_c(R_c^2)/nR, kept as an exact fraction so
// that equal-quality splits compare equal regardless of class numbering.
struct Quality {
    Wide num = 0;
    Wide den = 1;
    bool better_than(const Quality& o) const { return num * o.den > o.num * den; }
};

class Builder {
public:
    Builder(const Matrix& X, const std::vector<int>& y, std::size_t num_classes, const TreeParams& params)
        : X_(X), y_(y), k_(num_classes), params_(params), width_(X.front().size()) {}

    std::vector<TreeNode> build() {
        std::vector<std::size_t> all(X_.size());
        std::iota(all.begin(), all.end(), 0);
        grow(all, 0);
        return std::move(nodes_);
    }

private:
    std::vector<std::int64_t> class_counts(const std::vector<std::size_t>& idx) const {
        std::vector<std::int64_t> c(k_, 0);
        for (auto i : idx) ++c[static_cast<std::size_t>(y_[i])];
        return c;
    }

    static Wide sum_sq(const std::vector<std::int64_t>& c) {
        Wide s = 0;
        for (auto v : c) s += static_cast<Wide>(v) * v;
        return s;
    }

    int grow(const std::vector<std::size_t>& idx, int depth) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        const auto counts = class_counts(idx);
        auto& dist = nodes_[static_cast<std::size_t>(id)].distribution;
        dist.resize(k_);
        for (std::size_t c = 0; c < k_; ++c) dist[c] = static_cast<double>(counts[c]) / static_cast<double>(idx.size());

        const bool pure = std::count_if(counts.begin(), counts.end(), [](auto v) { return v > 0; }) <= 1;
        const bool depth_ok = !params_.max_depth || depth < *params_.max_depth;
        if (pure || !depth_ok || static_cast<int>(idx.size()) < params_.min_samples_split) return id;

        int best_slot = -1;
        double best_thr = 0.0;
        Quality best;
        std::vector<std::pair<double, int>> column(idx.size());
        for (std::size_t s = 0; s < width_; ++s) {
            for (std::size_t r = 0; r < idx.size(); ++r) column[r] = {X_[idx[r]][s], y_[idx[r]]};
            std::sort(column.begin(), column.end());
            std::vector<std::int64_t> left(k_, 0);
            std::vector<std::int64_t> right = counts;
            for (std::size_t r = 0; r + 1 < column.size(); ++r) {
                const auto c = static_cast<std::size_t>(column[r].second);
                ++left[c];
                --right[c];
                if (column[r].first == column[r + 1].first) continue;
                const Wide nl = static_cast<Wide>(r + 1);
                const Wide nr = static_cast<Wide>(column.size() - r - 1);
                const Quality q{sum_sq(left) * nr + sum_sq(right) * nl, nl * nr};
                if (best_slot < 0 || q.better_than(best)) {
                    best = q;
                    best_slot = static_cast<int>(s);
                    best_thr = 0.5 * (column[r].first + column[r + 1].first);
                }
            }
        }
        if (best_slot < 0) return id;  // all samples share one feature vector

        std::vector<std::size_t> li, ri;
        for (auto i : idx) (X_[i][static_cast<std::size_t>(best_slot)] <= best_thr ? li : ri).push_back(i);
        const int l = grow(li, depth + 1);
        const int r = grow(ri, depth + 1);
        auto& node = nodes_[static_cast<std::size_t>(id)];
        node.slot = best_slot;
        node.threshold = best_thr;
        node.left = l;
        node.right = r;
        return id;
    }

    const Matrix& X_;
    const std::vector<int>& y_;
    std::size_t k_;
    TreeParams params_;
    std::size_t width_;
    std::vector<TreeNode> nodes_;
};

}  // namespace

TreeModel fit_tree(const Matrix& X, const std::vector<int>& y, std::size_t num_classes, const TreeParams& params,
                   std::uint64_t /*seed*/) {
    if (X.empty()) throw ParamError("tree_fit: empty training data");
    if (X.size() != y.size()) throw ParamError("tree_fit: X and y differ in length");
    if (num_classes == 0) throw ParamError("tree_fit: need at least one class");
    if (params.min_samples_split < 2) throw ParamError("tree_fit: min_samples_split must be >= 2");
    if (params.max_depth && *params.max_depth < 0) throw ParamError("tree_fit: max_depth must be >= 0");
    const std::size_t width = X.front().size();
    for (const auto& row : X) {
        if (row.size() != width) throw ParamError("tree_fit: inconsistent feature widths");
    }
    for (int c : y) {
        if (c < 0 || static_cast<std::size_t>(c) >= num_classes) throw ParamError("tree_fit: class id out of range");
    }
    Builder b(X, y, num_classes, params);
    return TreeModel(b.build(), num_classes, width, params);
}

}  // namespace qameta
