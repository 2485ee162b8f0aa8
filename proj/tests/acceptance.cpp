#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "qameta/commands.hpp"
#include "qameta/dataset.hpp"
#include "qameta/evaluation.hpp"
#include "qameta/logistic.hpp"
#include "qameta/model_file.hpp"
#include "qameta/stats.hpp"

using namespace qameta;

namespace {

// Tolerances and bounds.
constexpr double kFixtureTolerance = 0.005;
constexpr double kFixtureSeconds = 1.0;
constexpr double kBestSingleSystem = 0.68;
constexpr double kMetasystemSeconds = 30.0;
constexpr double kLooSeconds = 120.0;
constexpr double kInvarianceTolerance = 1e-12;
constexpr double kHandChi2 = 25.0 / 3.0;
constexpr double kHandV = 0.4082;
constexpr double kHandTolerance = 1e-6;
constexpr double kGradientTolerance = 1e-4;
constexpr double kSearchSeconds = 600.0;
constexpr int kRandomTables = 1000;
constexpr int kGradientPoints = 100;

const std::filesystem::path kData = QAMETA_DATA_DIR;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

const Dataset& dataset() {
    static const Dataset d = join_dataset(load_questions(kData / "qald6_questions.json", QuestionFormat::Json),
                                          load_performance(kData / "qald6_performance.csv"));
    return d;
}

const PreparedDataset& prepared() {
    static const PreparedDataset p = prepare(dataset(), load_gazetteer(kData / "gazetteer.json"));
    return p;
}

EvalConfig pst(std::vector<FeatureGroup> groups = all_groups()) {
    EvalConfig c;
    c.method = Method::PSt;
    c.groups = std::move(groups);
    c.seed = 42;
    return c;
}

Outcome fixture_fidelity() {
    const auto start = std::chrono::steady_clock::now();
    const auto matrix = load_performance(kData / "qald6_performance.csv");
    const auto means = matrix.column_means();
    const double oracle = oracle_mean(matrix);
    const double elapsed = seconds_since(start);
    const std::vector<double> expected{0.54, 0.48, 0.17, 0.22, 0.15, 0.68};
    bool ok = means.size() == expected.size() && std::abs(oracle - 0.89) <= kFixtureTolerance &&
              elapsed < kFixtureSeconds;
    std::string detail = "means";
    for (std::size_t s = 0; s < means.size(); ++s) {
        const bool within = std::abs(means[s] - expected[s]) <= kFixtureTolerance;
        ok = ok && within;
        detail += " " + matrix.systems()[s] + "=" + fmt(means[s]) + (within ? "" : "(!)");
    }
    detail += "; oracle=" + fmt(oracle) + "; " + fmt(elapsed, 3) + " s";
    return {ok, detail};
}

Outcome metasystem_beats_best_system() {
    const auto start = std::chrono::steady_clock::now();
    const auto r = evaluate_full(prepared(), pst(parse_group_list("#T,Loc,QW,QRT")));
    const double elapsed = seconds_since(start);
    const bool in_band = r.aggregate >= 0.72 && r.aggregate <= 0.89;
    return {r.aggregate > kBestSingleSystem && elapsed < kMetasystemSeconds,
            "aggregate=" + fmt(r.aggregate) + (in_band ? " (inside" : " (outside") + " target band 0.72-0.89); " +
                fmt(elapsed, 3) + " s"};
}

Outcome overfitting_direction() {
    const auto full = evaluate_full(prepared(), pst());
    const auto start = std::chrono::steady_clock::now();
    const auto loo = evaluate_loo(prepared(), pst());
    const double elapsed = seconds_since(start);
    return {full.aggregate > loo.aggregate && elapsed < kLooSeconds,
            "full=" + fmt(full.aggregate) + " loo=" + fmt(loo.aggregate) + "; loo " + fmt(elapsed, 3) + " s"};
}

Outcome equivalence_oracles() {
    const auto& p = prepared();
    TrainingSet t;
    t.X = p.restricted(p.ids, all_groups());
    for (auto id : p.ids) {
        t.Y.push_back(derive_labels(p.matrix, id));
        t.f1.push_back(p.matrix.row(id));
    }
    auto run = [&](Method m, std::function<void(MethodParams&)> tweak) {
        MethodParams params;
        tweak(params);
        const auto model = fit(m, t, params, 42);
        std::vector<std::vector<double>> out;
        for (const auto& x : t.X) out.push_back(model.predict(x));
        return out;
    };
    const auto lc = run(Method::LC, [](MethodParams&) {});
    const auto br = run(Method::BR, [](MethodParams&) {});
    const bool ps0 = run(Method::PS, [](MethodParams& q) { q.prune = 0; }) == lc;
    const bool rakel_n = run(Method::RAkELd, [](MethodParams& q) { q.k = 6; }) == lc;
    const bool rakel_1 = run(Method::RAkELd, [](MethodParams& q) { q.k = 1; }) == br;
    auto yn = [](bool b) { return b ? "equal" : "DIFFER"; };
    return {ps0 && rakel_n && rakel_1, std::string("PS(p=0) vs LC ") + yn(ps0) + "; RAkELd(k=6) vs LC " + yn(rakel_n) +
                                           "; RAkELd(k=1) vs BR " + yn(rakel_1) + " over 100 questions"};
}

Outcome cramers_v_suite() {
    using Counts = std::vector<std::vector<std::int64_t>>;
    std::mt19937_64 rng(1234);
    std::uniform_int_distribution<int> dim(2, 7), cell(0, 80);
    double worst = 0.0;
    bool range_ok = true;
    int tables = 0;
    while (tables < kRandomTables) {
        const int I = dim(rng), J = dim(rng);
        Counts c(I, std::vector<std::int64_t>(J));
        for (auto& row : c)
            for (auto& x : row) x = cell(rng);
        const ContingencyTable t(c);
        if (t.degenerate()) continue;
        ++tables;
        const double v = cramers_v(t).v;
        range_ok = range_ok && v >= 0.0 && v <= 1.0;

        Counts rows = c;
        std::shuffle(rows.begin(), rows.end(), rng);
        std::vector<std::size_t> perm(J);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        Counts permuted = rows;
        for (int i = 0; i < I; ++i)
            for (int j = 0; j < J; ++j) permuted[i][j] = rows[i][perm[j]];
        Counts scaled = c;
        const std::int64_t factor = 2 + tables % 11;
        for (auto& row : scaled)
            for (auto& x : row) x *= factor;
        worst = std::max({worst, std::abs(cramers_v(ContingencyTable(permuted)).v - v),
                          std::abs(cramers_v(t.transposed()).v - v),
                          std::abs(cramers_v(ContingencyTable(scaled)).v - v)});
    }
    const ContingencyTable hand(Counts{{20, 5}, {10, 15}});
    const double chi2 = chi_squared(hand);
    const double v = cramers_v(hand).v;
    const bool hand_ok = std::abs(chi2 - kHandChi2) <= kHandTolerance && std::abs(v - std::sqrt(kHandChi2 / 50.0)) <= kHandTolerance &&
                         std::abs(v - kHandV) <= 1e-4;
    char worst_text[32];
    std::snprintf(worst_text, sizeof worst_text, "%.2e", worst);
    return {range_ok && worst <= kInvarianceTolerance && hand_ok,
            std::to_string(tables) + " tables in [0,1]: " + (range_ok ? "yes" : "NO") + "; max invariance error " +
                worst_text + "; hand chi2=" + fmt(chi2, 6) + " v=" + fmt(v, 6)};
}

Outcome association_ranking() {
    const auto profile = association_profile(dataset(), load_gazetteer(kData / "gazetteer.json"));
    std::vector<std::pair<double, FeatureGroup>> ranked;
    for (std::size_t f = 0; f < profile.features.size(); ++f) {
        if (auto v = profile.mean_v(f)) ranked.emplace_back(*v, profile.features[f]);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::set<FeatureGroup> top;
    std::string detail = "ranking";
    for (std::size_t i = 0; i < ranked.size() && i < 5; ++i) {
        if (i < 3) top.insert(ranked[i].second);
        detail += std::string(i ? ", " : " ") + std::string(group_name(ranked[i].second)) + "=" + fmt(ranked[i].first);
    }
    const bool ok = top.count(FeatureGroup::QRT) && top.count(FeatureGroup::QW) && top.count(FeatureGroup::Tokens);
    return {ok, detail};
}

Outcome logistic_gradient_check() {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> g(0.0, 1.0);
    const std::size_t n = 60, d = 8;
    Matrix X(n, std::vector<double>(d));
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& v : X[i]) v = g(rng);
        y[i] = g(rng) > 0.0 ? 1 : 0;
    }
    const double lambda = 1e-3, h = 1e-5;
    double worst = 0.0;
    for (int point = 0; point < kGradientPoints; ++point) {
        std::vector<double> w(d);
        for (auto& v : w) v = 2.0 * g(rng);
        const double b = g(rng);
        const auto grad = logistic_gradient(w, b, X, y, lambda);
        for (std::size_t j = 0; j <= d; ++j) {
            auto wp = w, wm = w;
            double bp = b, bm = b;
            if (j < d) {
                wp[j] += h;
                wm[j] -= h;
            } else {
                bp += h;
                bm -= h;
            }
            const double fd =
                (logistic_objective(wp, bp, X, y, lambda) - logistic_objective(wm, bm, X, y, lambda)) / (2.0 * h);
            const double denom = std::max(std::abs(fd), std::abs(grad[j]));
            if (denom > 1e-10) worst = std::max(worst, std::abs(fd - grad[j]) / denom);
        }
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", worst);
    return {worst < kGradientTolerance, std::string("max relative error ") + buf + " over " +
                                            std::to_string(kGradientPoints) + " points"};
}

Outcome determinism() {
    std::vector<std::string> bundles;
    for (const char* name : {"run_a", "run_b"}) {
        const auto dir = std::filesystem::temp_directory_path() / "qameta_acceptance" / name;
        std::filesystem::remove_all(dir);
        RunConfig c;
        c.out = dir;
        c.seed = 42;
        std::ostringstream out, err;
        if (run_command("train", c, out, err) != kOk || run_command("evaluate", c, out, err) != kOk) {
            return {false, "command failed: " + err.str()};
        }
        std::string bundle;
        for (const char* file : {"model.json", "report.csv", "boxplot.csv", "summary.md"}) bundle += read_file(dir / file);
        bundles.push_back(std::move(bundle));
    }
    return {bundles[0] == bundles[1], std::string("model and reports ") +
                                          (bundles[0] == bundles[1] ? "byte-identical" : "DIFFER") + " (" +
                                          std::to_string(bundles[0].size()) + " bytes)"};
}

Outcome exhaustive_search() {
    const auto start = std::chrono::steady_clock::now();
    const auto report = subset_search(prepared(), pst(), SearchMode::Exhaustive);
    const double elapsed = seconds_since(start);
    double all_score = -1.0;
    for (const auto& r : report.ranked)
        if (r.groups == all_groups()) all_score = r.score;
    const bool ok = report.ranked.size() == 8191 && report.best().score >= all_score && all_score >= 0.0 &&
                    elapsed < kSearchSeconds;
    return {ok, std::to_string(report.ranked.size()) + " subsets; best " + format_group_list(report.best().groups) +
                    "=" + fmt(report.best().score) + " vs all=" + fmt(all_score) + "; " + fmt(elapsed, 1) + " s"};
}

Outcome data_hygiene() {
    std::string detail;
    bool ok = true;
    for (auto protocol : {Protocol::CV10, Protocol::LOO}) {
        auto c = pst();
        std::mutex mu;
        std::size_t folds = 0, leaks = 0;
        std::set<QuestionId> tested;
        c.observer = [&](std::size_t, const std::vector<QuestionId>& train, const std::vector<QuestionId>& test) {
            const std::set<QuestionId> train_set(train.begin(), train.end());
            std::lock_guard<std::mutex> lock(mu);
            ++folds;
            for (auto id : test) {
                leaks += train_set.count(id);
                tested.insert(id);
            }
        };
        evaluate(protocol, prepared(), c);
        ok = ok && leaks == 0 && tested.size() == prepared().ids.size();
        detail += std::string(detail.empty() ? "" : "; ") + std::string(to_string(protocol)) + ": " +
                  std::to_string(folds) + " folds, " + std::to_string(leaks) + " leaks";
    }
    return {ok, detail};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"fixture fidelity", fixture_fidelity},
        {"metasystem beats best single system", metasystem_beats_best_system},
        {"overfitting direction", overfitting_direction},
        {"equivalence oracles", equivalence_oracles},
        {"Cramer's V property suite", cramers_v_suite},
        {"association ranking", association_ranking},
        {"logistic gradient check", logistic_gradient_check},
        {"determinism", determinism},
        {"exhaustive feature-subset search", exhaustive_search},
        {"data hygiene", data_hygiene},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
