#include "qameta/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <set>
#include <thread>

#include "qameta/error.hpp"
#include "qameta/rng.hpp"
#include "text_util.hpp"

namespace qameta {

namespace {

// Runs fn(i) for i in [0, n) on a small worker pool. Results must be written by index.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::string_view to_string(Protocol p) {
    switch (p) {
        case Protocol::CV10: return "cv10";
        case Protocol::LOO: return "loo";
        case Protocol::Full: return "full";
    }
    return "";
}

std::optional<Protocol> parse_protocol(std::string_view name) {
    const auto lower = detail::to_lower(detail::trim(name));
    if (lower == "cv10" || lower == "cv") return Protocol::CV10;
    if (lower == "loo") return Protocol::LOO;
    if (lower == "full") return Protocol::Full;
    return std::nullopt;
}

Matrix PreparedDataset::restricted(const std::vector<QuestionId>& subset, const std::vector<FeatureGroup>& groups) const {
    Matrix out;
    out.reserve(subset.size());
    for (QuestionId id : subset) out.push_back(restrict(vectors.at(id), groups).slots);
    return out;
}

PreparedDataset prepare(const Dataset& dataset, const Gazetteer& gazetteer) {
    PreparedDataset p;
    p.matrix = dataset.matrix;
    p.ids = dataset.matrix.ids();
    for (const auto& q : dataset.questions) p.vectors.emplace(q.id, encode(extract(q, gazetteer)));
    return p;
}

std::vector<std::vector<QuestionId>> make_folds(const std::vector<QuestionId>& ids, std::size_t folds,
                                                std::uint64_t seed) {
    if (folds < 2) throw ParamError("need at least two folds");
    if (ids.size() < folds) {
        throw ParamError("cannot split " + std::to_string(ids.size()) + " questions into " + std::to_string(folds) +
                         " folds");
    }
    std::vector<QuestionId> shuffled = ids;
    Rng rng(seed);
    rng.shuffle(std::span<QuestionId>(shuffled));
    std::vector<std::vector<QuestionId>> out(folds);
    for (std::size_t f = 0; f < folds; ++f) {
        const std::size_t begin = f * shuffled.size() / folds;
        const std::size_t end = (f + 1) * shuffled.size() / folds;
        out[f].assign(shuffled.begin() + static_cast<std::ptrdiff_t>(begin),
                      shuffled.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return out;
}

namespace {

EvaluationReport blank_report(Protocol protocol, const EvalConfig& config) {
    EvaluationReport r;
    r.protocol = protocol;
    r.method = config.method;
    r.params = config.params;
    r.groups = config.groups;
    r.seed = config.seed;
    return r;
}

void finish(EvaluationReport& r, const PreparedDataset& data, std::vector<QuestionResult> results) {
    std::map<QuestionId, QuestionResult> by_id;
    for (auto& q : results) by_id.emplace(q.id, q);
    r.per_question.clear();
    std::vector<double> f1;
    for (QuestionId id : data.ids) {
        r.per_question.push_back(by_id.at(id));
        f1.push_back(by_id.at(id).f1);
    }
    r.aggregate = mean(f1);
}

EvaluationReport run_folds(Protocol protocol, const PreparedDataset& data, const EvalConfig& config,
                           std::size_t folds) {
    const auto fold_ids = make_folds(data.ids, folds, config.seed);
    EvaluationReport r = blank_report(protocol, config);
    std::vector<std::vector<QuestionResult>> fold_results(fold_ids.size());
    r.fold_scores.assign(fold_ids.size(), 0.0);

    parallel_for(fold_ids.size(), config.threads, [&](std::size_t f) {
        const auto& test = fold_ids[f];
        const std::set<QuestionId> test_set(test.begin(), test.end());
        std::vector<QuestionId> train;
        for (QuestionId id : data.ids) {
            if (!test_set.count(id)) train.push_back(id);
        }
        if (config.observer) config.observer(f, train, test);
        const auto meta = train_metamodel(config.method, config.params, config.groups, data.matrix, train,
                                          data.restricted(train, config.groups), config.seed);
        const auto test_vectors = data.restricted(test, config.groups);
        std::vector<double> f1;
        for (std::size_t i = 0; i < test.size(); ++i) {
            const std::size_t chosen = select_from_scores(meta, meta.model.predict(test_vectors[i]));
            const double score = selection_f1(data.matrix, test[i], chosen);
            fold_results[f].push_back({test[i], f, chosen, score});
            f1.push_back(score);
        }
        r.fold_scores[f] = mean(f1);
    });

    std::vector<QuestionResult> all;
    for (auto& fr : fold_results) all.insert(all.end(), fr.begin(), fr.end());
    finish(r, data, std::move(all));
    return r;
}

}  // namespace

EvaluationReport evaluate_cv(const PreparedDataset& data, const EvalConfig& config) {
    return run_folds(config.folds == data.ids.size() ? Protocol::LOO : Protocol::CV10, data, config, config.folds);
}

EvaluationReport evaluate_loo(const PreparedDataset& data, const EvalConfig& config) {
    if (data.ids.size() < 2) throw ParamError("leave-one-out needs at least two questions");
    return run_folds(Protocol::LOO, data, config, data.ids.size());
}

EvaluationReport evaluate_full(const PreparedDataset& data, const EvalConfig& config) {
    if (data.ids.empty()) throw ParamError("full-train evaluation needs at least one question");
    EvaluationReport r = blank_report(Protocol::Full, config);
    if (config.observer) config.observer(0, data.ids, data.ids);
    const auto vectors = data.restricted(data.ids, config.groups);
    const auto meta =
        train_metamodel(config.method, config.params, config.groups, data.matrix, data.ids, vectors, config.seed);
    std::vector<QuestionResult> results;
    for (std::size_t i = 0; i < data.ids.size(); ++i) {
        const std::size_t chosen = select_from_scores(meta, meta.model.predict(vectors[i]));
        results.push_back({data.ids[i], 0, chosen, selection_f1(data.matrix, data.ids[i], chosen)});
    }
    finish(r, data, std::move(results));
    r.fold_scores = {r.aggregate};
    return r;
}

EvaluationReport evaluate(Protocol protocol, const PreparedDataset& data, const EvalConfig& config) {
    switch (protocol) {
        case Protocol::CV10: {
            EvalConfig c = config;
            if (c.folds == 0) c.folds = 10;
            return run_folds(Protocol::CV10, data, c, c.folds);
        }
        case Protocol::LOO: return evaluate_loo(data, config);
        case Protocol::Full: return evaluate_full(data, config);
    }
    throw ParamError("unknown protocol");
}

const std::vector<std::vector<FeatureGroup>>& reference_combinations() {
    static const std::vector<std::vector<FeatureGroup>> rows = [] {
        std::vector<std::vector<FeatureGroup>> r;
        for (const char* s : {"QRT", "QT", "QW", "#T", "QW,Loc", "QRT,QW", "QRT,QW,Loc", "#T,Loc,QW,QRT,Pers",
                              "#T,Loc,QW,QRT", "all"}) {
            r.push_back(parse_group_list(s));
        }
        return r;
    }();
    return rows;
}

SubsetSearchReport subset_search(const PreparedDataset& data, const EvalConfig& config, SearchMode mode,
                                 const std::vector<std::vector<FeatureGroup>>& listed) {
    std::vector<std::vector<FeatureGroup>> candidates;
    if (mode == SearchMode::Exhaustive) {
        const auto& groups = all_groups();
        for (unsigned mask = 1; mask < (1u << kFeatureGroupCount); ++mask) {
            std::vector<FeatureGroup> subset;
            for (std::size_t g = 0; g < kFeatureGroupCount; ++g) {
                if (mask & (1u << g)) subset.push_back(groups[g]);
            }
            candidates.push_back(std::move(subset));
        }
    } else {
        candidates = listed.empty() ? reference_combinations() : listed;
    }

    SubsetSearchReport report;
    report.ranked.resize(candidates.size());
    EvalConfig single = config;
    single.threads = 1;
    single.observer = nullptr;
    parallel_for(candidates.size(), config.threads, [&](std::size_t i) {
        EvalConfig c = single;
        c.groups = candidates[i];
        report.ranked[i] = {candidates[i], evaluate_full(data, c).aggregate};
    });
    if (mode == SearchMode::Exhaustive) {
        std::stable_sort(report.ranked.begin(), report.ranked.end(), [](const SubsetScore& a, const SubsetScore& b) {
            if (a.score != b.score) return a.score > b.score;
            if (a.groups.size() != b.groups.size()) return a.groups.size() < b.groups.size();
            return a.groups < b.groups;
        });
    }
    return report;
}

ComparisonTable compare_report(const PerformanceMatrix& matrix, const std::vector<EvaluationReport>& reports) {
    if (reports.empty()) throw ParamError("compare_report needs at least one report");
    ComparisonTable t;
    t.systems = matrix.systems();
    t.single_system_means = matrix.column_means();
    t.oracle = oracle_mean(matrix);
    const std::vector<QuestionId> expected = matrix.ids();
    for (const auto& r : reports) {
        std::vector<QuestionId> seen;
        for (const auto& q : r.per_question) seen.push_back(q.id);
        if (seen != expected) throw DataError("report " + report_label(r) + " was computed on a different question set");
        t.metasystems.emplace_back(report_label(r), r.aggregate);
    }
    return t;
}

std::string report_label(const EvaluationReport& r) {
    return std::string(to_string(r.protocol)) + ":" + std::string(to_string(r.method)) + "[" +
           format_group_list(r.groups) + "]";
}

std::string report_csv(const std::vector<EvaluationReport>& reports, const std::vector<std::string>& systems) {
    std::string out = "protocol,method,features,fold,question_id,chosen_system,f1\n";
    for (const auto& r : reports) {
        const std::string prefix = std::string(to_string(r.protocol)) + "," + std::string(to_string(r.method)) + ",\"" +
                                   format_group_list(r.groups) + "\",";
        for (const auto& q : r.per_question) {
            out += prefix + std::to_string(q.fold) + "," + std::to_string(q.id) + "," + systems.at(q.chosen) + "," +
                   detail::format_double(q.f1) + "\n";
        }
    }
    return out;
}

std::string boxplot_csv(const std::vector<EvaluationReport>& reports) {
    std::string out = "method,fold,score\n";
    for (const auto& r : reports) {
        for (std::size_t f = 0; f < r.fold_scores.size(); ++f) {
            out += std::string(to_string(r.method)) + "," + std::to_string(f) + "," +
                   detail::format_double(r.fold_scores[f]) + "\n";
        }
    }
    return out;
}

namespace {

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

}  // namespace

std::string summary_markdown(const ComparisonTable& table, const std::vector<EvaluationReport>& reports) {
    std::string out = "## Systems\n\n| System | Mean F1 |\n|---|---|\n";
    for (std::size_t s = 0; s < table.systems.size(); ++s) {
        out += "| " + table.systems[s] + " | " + fixed2(table.single_system_means[s]) + " |\n";
    }
    out += "| Oracle | " + fixed2(table.oracle) + " |\n\n";

    // One row per (method, features), one column per protocol.
    std::vector<std::string> rows;
    std::map<std::string, std::map<Protocol, double>> cells;
    for (const auto& r : reports) {
        const std::string key = std::string(to_string(r.method)) + " | " + format_group_list(r.groups);
        if (!cells.count(key)) rows.push_back(key);
        cells[key][r.protocol] = r.aggregate;
    }
    out += "## Metasystem\n\n| Classifier | Features | CV10 | LOO | Full |\n|---|---|---|---|---|\n";
    for (const auto& key : rows) {
        out += "| " + key;
        for (auto p : {Protocol::CV10, Protocol::LOO, Protocol::Full}) {
            const auto it = cells[key].find(p);
            out += " | " + (it == cells[key].end() ? std::string("-") : fixed2(it->second));
        }
        out += " |\n";
    }
    return out;
}

std::string subset_search_csv(const SubsetSearchReport& report) {
    std::string out = "rank,features,size,f1\n";
    for (std::size_t i = 0; i < report.ranked.size(); ++i) {
        const auto& s = report.ranked[i];
        out += std::to_string(i + 1) + ",\"" + format_group_list(s.groups) + "\"," + std::to_string(s.groups.size()) +
               "," + detail::format_double(s.score) + "\n";
    }
    return out;
}

std::string subset_search_markdown(const SubsetSearchReport& report, std::size_t top) {
    std::string out = "| Feature combination | F1 |\n|---|---|\n";
    for (std::size_t i = 0; i < std::min(top, report.ranked.size()); ++i) {
        out += "| " + format_group_list(report.ranked[i].groups) + " | " + fixed2(report.ranked[i].score) + " |\n";
    }
    return out;
}

}  // namespace qameta
