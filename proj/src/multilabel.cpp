#include "qameta/multilabel.hpp"

#include <algorithm>
#include <cmath>
#include <bit>
#include <cstring>
#include <map>
#include <numeric>
#include <set>

#include "qameta/error.hpp"
#include "qameta/ranking.hpp"
#include "qameta/rng.hpp"
#include "text_util.hpp"

namespace qameta {

namespace {

constexpr std::array<std::string_view, 10> kMethodNames{"BR", "LC", "CC",     "MCC",    "RT",
                                                        "PS", "PSt", "RAkELd", "RAkELo", "CDN"};

std::vector<double> augmented(std::span<const double> x, std::span<const double> extra) {
    std::vector<double> out(x.begin(), x.end());
    out.insert(out.end(), extra.begin(), extra.end());
    return out;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

std::uint64_t hash_vector(std::span<const double> x) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double v : x) {
        const auto bits = std::bit_cast<std::uint64_t>(v == 0.0 ? 0.0 : v);
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

LabelVector project(const LabelVector& y, const std::vector<int>& labels) {
    LabelVector out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out[i] = y[static_cast<std::size_t>(labels[i])];
    return out;
}

// Label powerset over `labels` using the given (example index, label set) pairs.
LabelPowerset fit_powerset(const Matrix& X, const std::vector<std::pair<std::size_t, LabelVector>>& examples,
                           std::vector<int> labels, const TreeParams& tree, std::uint64_t seed) {
    LabelPowerset ps;
    ps.labels = std::move(labels);
    std::map<LabelVector, int> class_of;
    Matrix rows;
    std::vector<int> ys;
    for (const auto& [index, y] : examples) {
        LabelVector combo = project(y, ps.labels);
        auto [it, inserted] = class_of.emplace(combo, static_cast<int>(ps.combos.size()));
        if (inserted) ps.combos.push_back(std::move(combo));
        rows.push_back(X[index]);
        ys.push_back(it->second);
    }
    if (rows.empty()) throw ParamError("label powerset: no training examples left");
    ps.model = fit_tree(rows, ys, ps.combos.size(), tree, seed);
    return ps;
}

std::vector<std::pair<std::size_t, LabelVector>> plain_examples(const std::vector<LabelVector>& Y) {
    std::vector<std::pair<std::size_t, LabelVector>> out;
    for (std::size_t i = 0; i < Y.size(); ++i) out.emplace_back(i, Y[i]);
    return out;
}

bool subset_of(const LabelVector& a, const LabelVector& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] && !b[i]) return false;
    }
    return true;
}

TreeModel fit_binary(const Matrix& X, const std::vector<int>& y, const TreeParams& tree, std::uint64_t seed) {
    return fit_tree(X, y, 2, tree, seed);
}

std::vector<int> column(const std::vector<LabelVector>& Y, std::size_t label) {
    std::vector<int> out(Y.size());
    for (std::size_t i = 0; i < Y.size(); ++i) out[i] = Y[i][label] ? 1 : 0;
    return out;
}

std::vector<int> identity_order(std::size_t n) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    return order;
}

}  // namespace

std::string_view to_string(Method m) { return kMethodNames[static_cast<std::size_t>(m)]; }

std::optional<Method> parse_method(std::string_view name) {
    const std::string lower = detail::to_lower(detail::trim(name));
    for (std::size_t i = 0; i < kMethodNames.size(); ++i) {
        if (detail::to_lower(kMethodNames[i]) == lower) return static_cast<Method>(i);
    }
    if (lower == "pcc" || lower == "pmcc") return Method::MCC;
    if (lower == "rakel") return Method::RAkELo;
    return std::nullopt;
}

const std::vector<Method>& all_methods() {
    static const std::vector<Method> m{Method::BR, Method::LC,     Method::CC,     Method::MCC, Method::RT,
                                       Method::PS, Method::PSt,    Method::RAkELd, Method::RAkELo, Method::CDN};
    return m;
}

nlohmann::json MethodParams::to_json() const {
    nlohmann::json j{{"prune", prune},
                     {"threshold", threshold},
                     {"k", k},
                     {"ensemble", ensemble},
                     {"chain_order", chain_order},
                     {"gibbs_iterations", gibbs_iterations},
                     {"burn_in", burn_in},
                     {"min_samples_split", tree.min_samples_split},
                     {"l2_lambda", logistic.l2_lambda},
                     {"epochs", logistic.epochs},
                     {"learning_rate", logistic.learning_rate}};
    j["max_depth"] = tree.max_depth ? nlohmann::json(*tree.max_depth) : nlohmann::json(nullptr);
    return j;
}

MethodParams MethodParams::from_json(const nlohmann::json& j) {
    MethodParams p;
    p.prune = j.at("prune").get<int>();
    p.threshold = j.at("threshold").get<double>();
    p.k = j.at("k").get<int>();
    p.ensemble = j.at("ensemble").get<int>();
    p.chain_order = j.at("chain_order").get<std::vector<int>>();
    p.gibbs_iterations = j.at("gibbs_iterations").get<int>();
    p.burn_in = j.at("burn_in").get<int>();
    p.tree.min_samples_split = j.at("min_samples_split").get<int>();
    if (!j.at("max_depth").is_null()) p.tree.max_depth = j.at("max_depth").get<int>();
    p.logistic.l2_lambda = j.at("l2_lambda").get<double>();
    p.logistic.epochs = j.at("epochs").get<int>();
    p.logistic.learning_rate = j.at("learning_rate").get<double>();
    return p;
}

void validate(const MethodParams& p, std::size_t label_count) {
    if (p.k < 1) throw ParamError("k must be >= 1");
    if (p.prune < 0) throw ParamError("prune must be >= 0");
    if (!(p.threshold >= 0.0 && p.threshold <= 1.0)) throw ParamError("threshold must lie in [0,1]");
    if (p.ensemble < 1) throw ParamError("ensemble size must be >= 1");
    if (p.burn_in < 0 || p.gibbs_iterations <= p.burn_in) {
        throw ParamError("need 0 <= burn_in < gibbs_iterations");
    }
    if (!p.chain_order.empty()) {
        std::vector<int> sorted = p.chain_order;
        std::sort(sorted.begin(), sorted.end());
        if (sorted != identity_order(label_count)) throw ParamError("chain order must be a permutation of the labels");
    }
}

std::vector<std::pair<std::size_t, LabelVector>> pruned_set_examples(const std::vector<LabelVector>& Y, int prune) {
    std::map<LabelVector, int> counts;
    std::vector<LabelVector> first_seen;
    for (const auto& y : Y) {
        if (counts[y]++ == 0) first_seen.push_back(y);
    }
    std::vector<LabelVector> kept;
    for (const auto& c : first_seen) {
        if (counts[c] > prune) kept.push_back(c);
    }
    std::vector<std::pair<std::size_t, LabelVector>> out;
    for (std::size_t i = 0; i < Y.size(); ++i) {
        if (counts[Y[i]] > prune) {
            out.emplace_back(i, Y[i]);
            continue;
        }
        std::vector<const LabelVector*> candidates;
        for (const auto& c : kept) {
            if (subset_of(c, Y[i])) candidates.push_back(&c);
        }
        for (const auto* c : candidates) {
            const bool maximal = std::none_of(candidates.begin(), candidates.end(), [&](const LabelVector* o) {
                return o != c && subset_of(*c, *o);
            });
            if (maximal) out.emplace_back(i, *c);
        }
    }
    return out;
}

MultiLabelModel fit(Method method, const TrainingSet& data, const MethodParams& params, std::uint64_t seed) {
    const auto& X = data.X;
    const auto& Y = data.Y;
    if (X.empty()) throw ParamError("multilabel fit: empty training data");
    if (X.size() != Y.size()) throw ParamError("multilabel fit: X and Y differ in length");
    const std::size_t n = Y.front().size();
    if (n == 0) throw ParamError("multilabel fit: label vectors are empty");
    for (const auto& y : Y) {
        if (y.size() != n) throw ParamError("multilabel fit: label vectors differ in length");
    }
    if (!data.f1.empty() && data.f1.size() != X.size()) throw ParamError("multilabel fit: f1 rows differ in length");
    validate(params, n);
    if ((method == Method::RAkELd || method == Method::RAkELo) && static_cast<std::size_t>(params.k) > n) {
        throw ParamError("RAkEL: k must not exceed the number of labels");
    }

    MultiLabelModel m;
    m.method_ = method;
    m.params_ = params;
    m.label_count_ = n;
    m.width_ = X.front().size();
    m.seed_ = seed;
    const auto& tree = params.tree;

    switch (method) {
        case Method::BR:
            for (std::size_t j = 0; j < n; ++j) m.binary_.push_back(fit_binary(X, column(Y, j), tree, seed));
            break;

        case Method::LC:
            m.powersets_.push_back(fit_powerset(X, plain_examples(Y), identity_order(n), tree, seed));
            break;

        case Method::PS:
        case Method::PSt: {
            auto examples = pruned_set_examples(Y, params.prune);
            // every combination was rare
            if (examples.empty()) examples = plain_examples(Y);
            m.powersets_.push_back(fit_powerset(X, examples, identity_order(n), tree, seed));
            break;
        }

        case Method::RAkELd: {
            const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(params.k), n);
            std::vector<int> labels = identity_order(n);
            Rng rng(seed);
            rng.shuffle(std::span<int>(labels));
            for (std::size_t start = 0; start < n; start += k) {
                std::vector<int> part(labels.begin() + static_cast<std::ptrdiff_t>(start),
                                      labels.begin() + static_cast<std::ptrdiff_t>(std::min(n, start + k)));
                m.powersets_.push_back(fit_powerset(X, plain_examples(Y), std::move(part), tree, seed));
            }
            break;
        }

        case Method::RAkELo: {
            const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(params.k), n);
            // Number of distinct k-subsets, capped.
            double possible = 1.0;
            for (std::size_t i = 0; i < k; ++i) possible = possible * static_cast<double>(n - i) / static_cast<double>(i + 1);
            const std::size_t target = static_cast<std::size_t>(std::min<double>(params.ensemble, possible + 0.5));
            std::set<std::vector<int>> drawn;
            Rng rng(seed);
            while (drawn.size() < target) {
                std::vector<int> labels = identity_order(n);
                rng.shuffle(std::span<int>(labels));
                labels.resize(k);
                std::sort(labels.begin(), labels.end());
                if (!drawn.insert(labels).second) continue;
                m.powersets_.push_back(fit_powerset(X, plain_examples(Y), labels, tree, seed));
            }
            break;
        }

        case Method::RT: {
            Matrix rows;
            std::vector<int> ys;
            for (std::size_t i = 0; i < X.size(); ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    if (!Y[i][j]) continue;
                    rows.push_back(X[i]);
                    ys.push_back(static_cast<int>(j));
                }
            }
            if (!rows.empty()) m.ranking_ = fit_tree(rows, ys, n, tree, seed);
            break;
        }

        case Method::CC:
        case Method::MCC: {
            const auto fit_chain = [&](const std::vector<int>& order) {
                std::vector<TreeModel> chain;
                Matrix aug = X;
                for (int label : order) {
                    chain.push_back(fit_binary(aug, column(Y, static_cast<std::size_t>(label)), tree, seed));
                    for (std::size_t i = 0; i < aug.size(); ++i) aug[i].push_back(Y[i][static_cast<std::size_t>(label)] ? 1.0 : 0.0);
                }
                return chain;
            };
            if (method == Method::CC) {
                m.chain_order_ = params.chain_order.empty() ? identity_order(n) : params.chain_order;
                m.binary_ = fit_chain(m.chain_order_);
                break;
            }
            // Training mean F1 ranks tied systems, as in selection.
            std::vector<double> priority(n, 0.0);
            for (const auto& row : data.f1) {
                for (std::size_t j = 0; j < n; ++j) priority[j] += row[j];
            }
            const std::size_t fallback = static_cast<std::size_t>(
                std::max_element(priority.begin(), priority.end()) - priority.begin());
            Rng rng(seed);
            double best_score = -1.0;
            for (int s = 0; s < params.ensemble; ++s) {
                std::vector<int> order = identity_order(n);
                rng.shuffle(std::span<int>(order));
                MultiLabelModel candidate = m;
                candidate.chain_order_ = order;
                candidate.binary_ = fit_chain(order);
                double score = 0.0;
                for (std::size_t i = 0; i < X.size(); ++i) {
                    const auto conf = candidate.predict(X[i]);
                    if (!data.f1.empty()) {
                        score += data.f1[i][argmax_with_priority(conf, priority, fallback)];
                    } else {
                        score += threshold_scores(conf, 0.5) == Y[i] ? 1.0 : 0.0;
                    }
                }
                score /= static_cast<double>(X.size());
                if (score > best_score) {
                    best_score = score;
                    m.chain_order_ = std::move(candidate.chain_order_);
                    m.binary_ = std::move(candidate.binary_);
                }
            }
            break;
        }

        case Method::CDN: {
            for (std::size_t j = 0; j < n; ++j) {
                Matrix rows;
                for (std::size_t i = 0; i < X.size(); ++i) {
                    std::vector<double> others;
                    for (std::size_t o = 0; o < n; ++o) {
                        if (o != j) others.push_back(Y[i][o] ? 1.0 : 0.0);
                    }
                    rows.push_back(augmented(X[i], others));
                }
                m.nodes_.push_back(fit_logistic(rows, column(Y, j), params.logistic, seed));
            }
            break;
        }
    }
    return m;
}

MultiLabelModel MultiLabelModel::uninformative_cdn(std::size_t label_count, std::size_t width,
                                                   const MethodParams& params, std::uint64_t seed) {
    validate(params, label_count);
    MultiLabelModel m;
    m.method_ = Method::CDN;
    m.params_ = params;
    m.label_count_ = label_count;
    m.width_ = width;
    m.seed_ = seed;
    for (std::size_t j = 0; j < label_count; ++j) {
        m.nodes_.push_back(LogisticModel::with_weights(std::vector<double>(width + label_count - 1, 0.0), 0.0));
    }
    return m;
}

std::vector<double> MultiLabelModel::powerset_marginals(std::span<const double> x) const {
    std::vector<double> sum(label_count_, 0.0);
    std::vector<int> covered(label_count_, 0);
    for (const auto& ps : powersets_) {
        const auto p = ps.model.predict_proba(x);
        for (std::size_t li = 0; li < ps.labels.size(); ++li) {
            double marginal = 0.0;
            for (std::size_t c = 0; c < p.size(); ++c) {
                if (ps.combos[c][li]) marginal += p[c];
            }
            const auto label = static_cast<std::size_t>(ps.labels[li]);
            sum[label] += clamp01(marginal);
            ++covered[label];
        }
    }
    for (std::size_t j = 0; j < label_count_; ++j) {
        if (covered[j] > 1) sum[j] /= covered[j];
    }
    return sum;
}

std::vector<double> MultiLabelModel::predict_chain(std::span<const double> x) const {
    std::vector<double> scores(label_count_, 0.0);
    std::vector<double> aug(x.begin(), x.end());
    for (std::size_t pos = 0; pos < chain_order_.size(); ++pos) {
        const double p = binary_[pos].predict_proba(aug)[1];
        scores[static_cast<std::size_t>(chain_order_[pos])] = p;
        aug.push_back(p >= 0.5 ? 1.0 : 0.0);
    }
    return scores;
}

std::vector<double> MultiLabelModel::predict_cdn(std::span<const double> x) const {
    const std::size_t n = label_count_;
    Rng rng(mix_seed(seed_, hash_vector(x)));
    std::vector<double> state(n);
    for (auto& s : state) s = rng.uniform() < 0.5 ? 1.0 : 0.0;
    std::vector<double> marginal(n, 0.0);
    std::vector<double> input(x.begin(), x.end());
    input.resize(x.size() + n - 1);
    for (int it = 0; it < params_.gibbs_iterations; ++it) {
        for (std::size_t j = 0; j < n; ++j) {
            std::size_t at = x.size();
            for (std::size_t o = 0; o < n; ++o) {
                if (o != j) input[at++] = state[o];
            }
            const double p = nodes_[j].predict_proba(input);
            state[j] = rng.uniform() < p ? 1.0 : 0.0;
            // Averaging the sampled conditionals estimates the same marginal
            // as averaging the 0/1 draws, with lower variance.
            if (it >= params_.burn_in) marginal[j] += p;
        }
    }
    const double kept = static_cast<double>(params_.gibbs_iterations - params_.burn_in);
    for (auto& v : marginal) v = clamp01(v / kept);
    return marginal;
}

std::vector<double> MultiLabelModel::predict(std::span<const double> x) const {
    if (x.size() != width_) {
        throw ParamError("model expects width " + std::to_string(width_) + ", got " + std::to_string(x.size()));
    }
    switch (method_) {
        case Method::BR: {
            std::vector<double> s(label_count_);
            for (std::size_t j = 0; j < label_count_; ++j) s[j] = binary_[j].predict_proba(x)[1];
            return s;
        }
        case Method::CC:
        case Method::MCC: return predict_chain(x);
        case Method::RT: {
            if (!ranking_) return std::vector<double>(label_count_, 0.0);
            auto s = ranking_->predict_proba(x);
            for (auto& v : s) v = clamp01(v);
            return s;
        }
        case Method::PSt: {
            auto s = powerset_marginals(x);
            for (auto& v : s) {
                if (v < params_.threshold) v = 0.0;
            }
            return s;
        }
        case Method::LC:
        case Method::PS:
        case Method::RAkELd:
        case Method::RAkELo: return powerset_marginals(x);
        case Method::CDN: return predict_cdn(x);
    }
    return {};
}

LabelVector threshold_scores(std::span<const double> scores, double threshold) {
    LabelVector out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] >= threshold;
    return out;
}

LabelVector predict_set(const MultiLabelModel& model, std::span<const double> x, double threshold) {
    if (std::isnan(threshold)) throw ParamError("threshold must be a number");
    return threshold_scores(model.predict(x), threshold);
}

nlohmann::json MultiLabelModel::to_json() const {
    nlohmann::json j{{"method", std::string(to_string(method_))},
                     {"params", params_.to_json()},
                     {"label_count", label_count_},
                     {"width", width_},
                     {"seed", seed_}};
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : binary_) trees.push_back(t.to_json());
    j["binary"] = std::move(trees);
    j["chain_order"] = chain_order_;
    nlohmann::json sets = nlohmann::json::array();
    for (const auto& ps : powersets_) {
        nlohmann::json combos = nlohmann::json::array();
        for (const auto& c : ps.combos) {
            std::string bits;
            for (bool b : c) bits += b ? '1' : '0';
            combos.push_back(bits);
        }
        sets.push_back({{"labels", ps.labels}, {"combos", std::move(combos)}, {"tree", ps.model.to_json()}});
    }
    j["powersets"] = std::move(sets);
    j["ranking"] = ranking_ ? ranking_->to_json() : nlohmann::json(nullptr);
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& node : nodes_) nodes.push_back(node.to_json());
    j["nodes"] = std::move(nodes);
    return j;
}

MultiLabelModel MultiLabelModel::from_json(const nlohmann::json& j) {
    MultiLabelModel m;
    const auto method = parse_method(j.at("method").get<std::string>());
    if (!method) throw DataError("model: unknown method " + j.at("method").dump());
    m.method_ = *method;
    m.params_ = MethodParams::from_json(j.at("params"));
    m.label_count_ = j.at("label_count").get<std::size_t>();
    m.width_ = j.at("width").get<std::size_t>();
    m.seed_ = j.at("seed").get<std::uint64_t>();
    for (const auto& t : j.at("binary")) m.binary_.push_back(TreeModel::from_json(t));
    m.chain_order_ = j.at("chain_order").get<std::vector<int>>();
    for (const auto& s : j.at("powersets")) {
        LabelPowerset ps;
        ps.labels = s.at("labels").get<std::vector<int>>();
        for (const auto& c : s.at("combos")) {
            const auto bits = c.get<std::string>();
            if (bits.size() != ps.labels.size()) throw DataError("model: combination width mismatch");
            LabelVector v;
            for (char b : bits) v.push_back(b == '1');
            ps.combos.push_back(std::move(v));
        }
        ps.model = TreeModel::from_json(s.at("tree"));
        if (ps.model.num_classes() != ps.combos.size()) throw DataError("model: powerset class count mismatch");
        for (int l : ps.labels) {
            if (l < 0 || static_cast<std::size_t>(l) >= m.label_count_) throw DataError("model: label out of range");
        }
        m.powersets_.push_back(std::move(ps));
    }
    if (!j.at("ranking").is_null()) m.ranking_ = TreeModel::from_json(j.at("ranking"));
    for (const auto& node : j.at("nodes")) m.nodes_.push_back(LogisticModel::from_json(node));

    const bool chain = m.method_ == Method::CC || m.method_ == Method::MCC;
    if (m.method_ == Method::BR && m.binary_.size() != m.label_count_) throw DataError("model: BR tree count mismatch");
    if (chain && (m.binary_.size() != m.label_count_ || m.chain_order_.size() != m.label_count_)) {
        throw DataError("model: chain length mismatch");
    }
    if (m.method_ == Method::CDN && m.nodes_.size() != m.label_count_) throw DataError("model: CDN node count mismatch");
    return m;
}

}  // namespace qameta
