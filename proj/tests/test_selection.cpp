#include <random>

#include "doctest.h"
#include "fixture.hpp"
#include "qameta/error.hpp"
#include "qameta/ranking.hpp"
#include "qameta/selection.hpp"

using namespace qameta;

namespace {

MetaModel fixture_meta(Method method = Method::PSt, std::vector<FeatureGroup> groups = all_groups()) {
    const auto& d = fixture::dataset();
    return train_metamodel(method, {}, groups, d, d.matrix.ids(), fixture::gazetteer(), 42);
}

}  // namespace

TEST_CASE("argmax with priority") {
    const std::vector<double> prio{0.1, 0.5, 0.3};
    CHECK(argmax_with_priority(std::vector<double>{0.2, 0.1, 0.9}, prio, 0) == 2);
    CHECK(argmax_with_priority(std::vector<double>{0.4, 0.4, 0.4}, prio, 0) == 1);
    CHECK(argmax_with_priority(std::vector<double>{0.0, 0.0, 0.0}, prio, 2) == 2);
    CHECK(argmax_with_priority(std::vector<double>{0.4, 0.0, 0.4}, std::vector<double>{0.2, 0.9, 0.2}, 1) == 0);
}

TEST_CASE("selection examples") {
    const auto meta = fixture_meta();
    REQUIRE(meta.systems.size() == 6);
    CHECK(meta.policy.fallback == 5);  // UTQA has the highest training mean
    CHECK(meta.training_mean_f1[5] == doctest::Approx(0.6861));
    CHECK(select_from_scores(meta, std::vector<double>{0.1, 0.9, 0.2, 0.0, 0.0, 0.3}) == 1);
    CHECK(select_from_scores(meta, std::vector<double>(6, 0.4)) == 5);
    CHECK(select_from_scores(meta, std::vector<double>(6, 0.0)) == meta.policy.fallback);

    auto lowest = meta;
    lowest.policy.tie_break = TieBreak::LowestIndex;
    CHECK(select_from_scores(lowest, std::vector<double>(6, 0.4)) == 0);
    CHECK_THROWS_AS(select_from_scores(meta, std::vector<double>(5, 0.4)), ParamError);
}

TEST_CASE("argmax is scale invariant") {
    const auto meta = fixture_meta();
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 500; ++t) {
        std::vector<double> c(6);
        for (auto& v : c) v = std::round(u(rng) * 4) / 4;
        const auto base = select_from_scores(meta, c);
        for (double k : {0.5, 2.0, 1024.0}) {
            auto scaled = c;
            for (auto& v : scaled) v *= k;
            CHECK(select_from_scores(meta, scaled) == base);
        }
    }
}

TEST_CASE("oracle selection") {
    const auto& m = fixture::dataset().matrix;
    const auto q0 = oracle_select(m, 0);
    CHECK(q0.f1 == 1.0);
    CHECK(m.score(0, q0.system) == 1.0);
    CHECK(q0.system == 1);
    const auto q49 = oracle_select(m, 49);
    CHECK(q49.system == 0);
    CHECK(q49.f1 == 0.0);
    CHECK(oracle_mean(m) == doctest::Approx(0.8935).epsilon(1e-12));
    CHECK_THROWS_AS(oracle_select(m, 4242), DataError);
}

TEST_CASE("selection F1 lookups") {
    const auto& m = fixture::dataset().matrix;
    CHECK(selection_f1(m, 10, *m.system_index("UTQA")) == 0.66);
    for (std::size_t s = 0; s < 6; ++s) {
        CHECK(selection_f1(m, 2, s) == 0.0);
        CHECK(selection_f1(m, 12, s) == 1.0);
    }
    CHECK_THROWS(selection_f1(m, 10, 6));
}

TEST_CASE("the published metasystem column is reproduced by lookup") {
    const auto& m = fixture::dataset().matrix;
    const auto expected = parse_performance_csv(read_file(fixture::metasystem_path()));
    double total = 0.0, oracle_total = 0.0;
    for (auto id : m.ids()) {
        const double published = expected.score(id, 1);
        std::optional<std::size_t> choice;
        for (std::size_t s = 0; s < 6 && !choice; ++s)
            if (m.score(id, s) == published) choice = s;
        REQUIRE(choice.has_value());
        total += selection_f1(m, id, *choice);
        oracle_total += oracle_select(m, id).f1;
        CHECK(oracle_select(m, id).f1 == expected.score(id, 0));
    }
    CHECK(std::abs(total / 100.0 - 0.78) <= 0.005);
    CHECK(oracle_total / 100.0 == doctest::Approx(0.8935));
}

TEST_CASE("oracle dominates every choice") {
    const auto meta = fixture_meta();
    const auto& d = fixture::dataset();
    for (const auto& q : d.questions) {
        const double best = oracle_select(d.matrix, q.id).f1;
        for (std::size_t s = 0; s < 6; ++s) CHECK(best >= selection_f1(d.matrix, q.id, s));
        CHECK(best >= selection_f1(d.matrix, q.id, select(meta, q, fixture::gazetteer())));
    }
}

TEST_CASE("select is deterministic and total") {
    const auto a = fixture_meta(Method::CDN);
    const auto b = fixture_meta(Method::CDN);
    for (const auto& text : {"Who is the mayor of Paris?", "xyzzy", "?", "How many moons does Mars have?"}) {
        QuestionRecord q{0, text, {}};
        const auto s = select(a, q, fixture::gazetteer());
        CHECK(s < 6);
        CHECK(s == select(b, q, fixture::gazetteer()));
    }
}

TEST_CASE("metamodel from precomputed vectors matches the dataset path") {
    const auto& p = fixture::prepared();
    const auto groups = parse_group_list("#T,Loc,QW,QRT");
    const auto a = train_metamodel(Method::PSt, {}, groups, p.matrix, p.ids, p.restricted(p.ids, groups), 42);
    const auto b = fixture_meta(Method::PSt, groups);
    for (const auto& q : fixture::dataset().questions) {
        const auto x = question_vector(q, fixture::gazetteer(), groups);
        CHECK(a.model.predict(x) == b.model.predict(x));
    }
    CHECK(a.training_mean_f1 == b.training_mean_f1);
}
