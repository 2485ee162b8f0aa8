#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <set>

#include "doctest.h"
#include "fixture.hpp"
#include "qameta/error.hpp"
#include "qameta/evaluation.hpp"

using namespace qameta;

namespace {

EvalConfig config(Method m = Method::PSt, std::vector<FeatureGroup> groups = all_groups()) {
    EvalConfig c;
    c.method = m;
    c.groups = std::move(groups);
    return c;
}

double mean_of(const EvaluationReport& r) {
    double s = 0.0;
    for (const auto& q : r.per_question) s += q.f1;
    return s / static_cast<double>(r.per_question.size());
}

}  // namespace

TEST_CASE("protocol names") {
    CHECK(parse_protocol("cv10") == Protocol::CV10);
    CHECK(parse_protocol("LOO") == Protocol::LOO);
    CHECK(parse_protocol("full") == Protocol::Full);
    CHECK_FALSE(parse_protocol("holdout").has_value());
    CHECK(to_string(Protocol::CV10) == "cv10");
}

TEST_CASE("folds partition the questions") {
    std::vector<QuestionId> ids(23);
    std::iota(ids.begin(), ids.end(), 100);
    const auto folds = make_folds(ids, 10, 42);
    REQUIRE(folds.size() == 10);
    std::vector<QuestionId> all;
    for (const auto& f : folds) {
        CHECK((f.size() == 2 || f.size() == 3));
        all.insert(all.end(), f.begin(), f.end());
    }
    std::sort(all.begin(), all.end());
    CHECK(all == ids);
    CHECK(make_folds(ids, 10, 42) == folds);
    CHECK(make_folds(ids, 10, 43) != folds);
    CHECK_THROWS_AS(make_folds(ids, 1, 42), ParamError);
    CHECK_THROWS_AS(make_folds(ids, 24, 42), ParamError);
}

TEST_CASE("cross-validation report on the fixture") {
    const auto r = evaluate_cv(fixture::prepared(), config(Method::CC));
    CHECK(r.protocol == Protocol::CV10);
    REQUIRE(r.fold_scores.size() == 10);
    for (double s : r.fold_scores) {
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
    }
    CHECK(r.per_question.size() == 100);
    CHECK(std::abs(r.aggregate - mean_of(r)) < 1e-12);
    CHECK(r.aggregate >= 0.50);
    CHECK(r.aggregate <= 0.75);
    for (std::size_t i = 0; i < 100; ++i) CHECK(r.per_question[i].id == fixture::prepared().ids[i]);
}

TEST_CASE("n-fold cross-validation is leave-one-out") {
    auto c = config(Method::BR, parse_group_list("QRT,QW"));
    c.folds = 100;
    const auto cv = evaluate_cv(fixture::prepared(), c);
    const auto loo = evaluate_loo(fixture::prepared(), c);
    CHECK(cv.protocol == Protocol::LOO);
    CHECK(loo.fold_scores.size() == 100);
    CHECK(cv.fold_scores == loo.fold_scores);
    CHECK(cv.aggregate == loo.aggregate);
    for (std::size_t i = 0; i < 100; ++i) CHECK(cv.per_question[i].chosen == loo.per_question[i].chosen);
}

TEST_CASE("data hygiene under cv10 and loo") {
    for (auto protocol : {Protocol::CV10, Protocol::LOO}) {
        auto c = config(Method::BR, parse_group_list("QRT"));
        std::mutex mu;
        std::set<QuestionId> tested;
        std::atomic<int> violations{0};
        std::atomic<std::size_t> calls{0};
        c.observer = [&](std::size_t, const std::vector<QuestionId>& train, const std::vector<QuestionId>& test) {
            ++calls;
            const std::set<QuestionId> train_set(train.begin(), train.end());
            for (auto id : test)
                if (train_set.count(id)) ++violations;
            CHECK_EQ(train.size() + test.size(), 100u);
            std::lock_guard<std::mutex> lock(mu);
            tested.insert(test.begin(), test.end());
        };
        evaluate(protocol, fixture::prepared(), c);
        CHECK(violations == 0);
        CHECK(tested.size() == 100);
        CHECK(calls == (protocol == Protocol::LOO ? 100u : 10u));
    }
}

TEST_CASE("full-train beats leave-one-out for PSt") {
    const auto full = evaluate_full(fixture::prepared(), config());
    const auto loo = evaluate_loo(fixture::prepared(), config());
    CHECK(full.aggregate > loo.aggregate);
    CHECK(full.aggregate >= 0.70);
    CHECK(full.fold_scores == std::vector<double>{full.aggregate});
    const auto best = evaluate_full(fixture::prepared(), config(Method::PSt, parse_group_list("#T,Loc,QW,QRT")));
    CHECK(best.aggregate > 0.68);
}

TEST_CASE("loo needs two questions") {
    const auto& p = fixture::prepared();
    const auto one_id = p.ids.front();
    PreparedDataset one{{one_id}, {{one_id, p.vectors.at(one_id)}}, p.matrix.subset({one_id})};
    CHECK_THROWS_AS(evaluate_loo(one, config()), ParamError);
}

TEST_CASE("identical questions predict each other under loo") {
    const auto& p = fixture::prepared();
    const auto a = p.ids[0], b = p.ids[1];
    PerformanceMatrix m(p.matrix.systems());
    m.add_row(a, {0.0, 0.0, 1.0, 0.0, 0.0, 0.0});
    m.add_row(b, {0.0, 0.0, 1.0, 0.0, 0.0, 0.0});
    PreparedDataset two{{a, b}, {{a, p.vectors.at(a)}, {b, p.vectors.at(a)}}, m};
    const auto r = evaluate_loo(two, config(Method::BR));
    CHECK(r.aggregate == 1.0);
}

TEST_CASE("a system that always scores 1.0 makes every method perfect") {
    const auto& p = fixture::prepared();
    PerformanceMatrix m(p.matrix.systems());
    for (auto id : p.ids) {
        auto row = p.matrix.row(id);
        row[3] = 1.0;
        m.add_row(id, row);
    }
    PreparedDataset d{p.ids, p.vectors, m};
    for (auto method : all_methods()) {
        CAPTURE(to_string(method));
        auto c = config(method);
        c.params.gibbs_iterations = 30;
        CHECK(evaluate_full(d, c).aggregate == 1.0);
    }
}

TEST_CASE("reports are reproducible across thread counts") {
    auto c = config(Method::MCC, parse_group_list("QRT,QW,#T"));
    c.threads = 1;
    const auto a = evaluate_cv(fixture::prepared(), c);
    c.threads = 4;
    const auto b = evaluate_cv(fixture::prepared(), c);
    const auto systems = fixture::prepared().matrix.systems();
    CHECK(report_csv({a}, systems) == report_csv({b}, systems));
    c.seed = 7;
    CHECK(report_csv({evaluate_cv(fixture::prepared(), c)}, systems) != report_csv({a}, systems));
}

TEST_CASE("listed subset search") {
    const auto r = subset_search(fixture::prepared(), config(), SearchMode::Listed, reference_combinations());
    CHECK(r.ranked.size() == reference_combinations().size());
    CHECK(reference_combinations().size() == 10);
    std::vector<std::vector<FeatureGroup>> singles;
    for (auto g : all_groups()) singles.push_back({g});
    const auto s = subset_search(fixture::prepared(), config(), SearchMode::Listed, singles);
    REQUIRE(s.ranked.size() == 13);
    for (std::size_t i = 0; i < 13; ++i) CHECK(s.ranked[i].groups == singles[i]);
}

TEST_CASE("comparison table") {
    const auto& m = fixture::prepared().matrix;
    CHECK_THROWS_AS(compare_report(m, {}), ParamError);
    const auto full = evaluate_full(fixture::prepared(), config());
    const auto t = compare_report(m, {full});
    const std::vector<double> footer{0.54, 0.48, 0.17, 0.22, 0.15, 0.68};
    for (std::size_t s = 0; s < 6; ++s) CHECK(std::floor(t.single_system_means[s] * 100 + 1e-9) / 100 == doctest::Approx(footer[s]));
    CHECK(t.oracle == doctest::Approx(0.8935));
    REQUIRE(t.metasystems.size() == 1);
    CHECK(t.metasystems[0].second == full.aggregate);
    auto partial = full;
    partial.per_question.pop_back();
    CHECK_THROWS_AS(compare_report(m, {partial}), DataError);
}

TEST_CASE("report writers") {
    const auto cv = evaluate_cv(fixture::prepared(), config(Method::BR, parse_group_list("QRT,QW")));
    const auto csv = report_csv({cv}, fixture::prepared().matrix.systems());
    CHECK(csv.rfind("protocol,method,features,fold,question_id,chosen_system,f1\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 101);
    CHECK(csv.find("cv10,BR,\"QRT,QW\",") != std::string::npos);
    const auto box = boxplot_csv({cv});
    CHECK(box.rfind("method,fold,score\n", 0) == 0);
    CHECK(std::count(box.begin(), box.end(), '\n') == 11);
    const auto md = summary_markdown(compare_report(fixture::prepared().matrix, {cv}), {cv});
    CHECK(md.find("UTQA") != std::string::npos);
    CHECK(md.find("| Classifier |") != std::string::npos);
}
