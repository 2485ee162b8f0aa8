#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "fixture.hpp"
#include "qameta/error.hpp"
#include "qameta/stats.hpp"

using namespace qameta;

namespace {

using Counts = std::vector<std::vector<std::int64_t>>;

Counts random_counts(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> dim(2, 6);
    std::uniform_int_distribution<int> cell(1, 60);
    const int I = dim(rng), J = dim(rng);
    Counts c(I, std::vector<std::int64_t>(J));
    for (auto& row : c)
        for (auto& x : row) x = cell(rng) % 7 == 0 ? 0 : cell(rng);
    // keep every margin positive
    for (int i = 0; i < I; ++i) c[i][i % J] += 1;
    for (int j = 0; j < J; ++j) c[j % I][j] += 1;
    return c;
}

}  // namespace

TEST_CASE("chi squared hand cases") {
    CHECK(chi_squared(ContingencyTable(Counts{{10, 0}, {0, 10}})) == doctest::Approx(20.0).epsilon(1e-14));
    CHECK(chi_squared(ContingencyTable(Counts{{5, 5}, {5, 5}})) == 0.0);
    CHECK(chi_squared(ContingencyTable(Counts{{20, 5}, {10, 15}})) == doctest::Approx(25.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("cramers v hand cases") {
    CHECK(cramers_v(ContingencyTable(Counts{{10, 0}, {0, 10}})).v == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(cramers_v(ContingencyTable(Counts{{5, 5}, {5, 5}})).v == 0.0);
    const auto r = cramers_v(ContingencyTable(Counts{{20, 5}, {10, 15}}));
    CHECK(std::abs(r.v - std::sqrt((25.0 / 3.0) / 50.0)) < 1e-12);
    CHECK(std::abs(r.v - 0.4082) < 1e-4);
    CHECK(r.k == 2);
}

TEST_CASE("degenerate tables") {
    const ContingencyTable one_col(Counts{{4}, {6}});
    CHECK(one_col.degenerate());
    CHECK_THROWS_AS(cramers_v(one_col), DegenerateTableError);
    const ContingencyTable zero_row(Counts{{0, 0}, {3, 4}});
    CHECK(zero_row.degenerate());
    CHECK_THROWS_AS(chi_squared(zero_row), DegenerateTableError);
    CHECK_THROWS_AS(ContingencyTable(Counts{{1, 2}, {3}}), ParamError);
    CHECK_THROWS_AS(ContingencyTable(Counts{{1, -2}, {3, 4}}), ParamError);
}

TEST_CASE("table margins") {
    const ContingencyTable t(Counts{{1, 2, 3}, {4, 5, 6}});
    CHECK(t.n() == 21);
    CHECK(t.row_margins() == std::vector<std::int64_t>{6, 15});
    CHECK(t.col_margins() == std::vector<std::int64_t>{5, 7, 9});
    CHECK(t.transposed().counts() == Counts{{1, 4}, {2, 5}, {3, 6}});
}

TEST_CASE("cramers v property fuzz") {
    std::mt19937_64 rng(20240601);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto counts = random_counts(rng);
        const ContingencyTable t(counts);
        REQUIRE_FALSE(t.degenerate());
        const auto base = cramers_v(t);
        CHECK(base.v >= 0.0);
        CHECK(base.v <= 1.0);

        auto rows = counts;
        std::shuffle(rows.begin(), rows.end(), rng);
        std::vector<std::size_t> perm(counts[0].size());
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        Counts permuted = rows;
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < perm.size(); ++j) permuted[i][j] = rows[i][perm[j]];
        const auto p = cramers_v(ContingencyTable(permuted));
        CHECK(std::abs(p.v - base.v) < 1e-12);
        CHECK(std::abs(p.chi_squared - base.chi_squared) <= 1e-12 * std::max(1.0, base.chi_squared));

        CHECK(std::abs(cramers_v(t.transposed()).v - base.v) < 1e-12);

        const std::int64_t c = 1 + trial % 9;
        Counts scaled = counts;
        for (auto& row : scaled)
            for (auto& x : row) x *= c;
        const auto s = cramers_v(ContingencyTable(scaled));
        CHECK(std::abs(s.v - base.v) < 1e-12);
        CHECK(std::abs(s.chi_squared - c * base.chi_squared) <= 1e-9 * std::max(1.0, s.chi_squared));
    }
}

TEST_CASE("v is zero on product tables") {
    const std::vector<std::int64_t> a{1, 3, 2}, b{2, 5, 1, 4};
    Counts c(a.size(), std::vector<std::int64_t>(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) c[i][j] = a[i] * b[j];
    CHECK(cramers_v(ContingencyTable(c)).v == doctest::Approx(0.0));
    CHECK(cramers_v(ContingencyTable(Counts{{3, 1}, {1, 3}})).v > 0.0);
}

TEST_CASE("build table from the fixture") {
    const auto& d = fixture::dataset();
    std::map<QuestionId, std::string> sup;
    for (const auto& rec : d.questions) sup[rec.id] = extract(rec, fixture::gazetteer()).superlative ? "1" : "0";
    const auto utqa = *d.matrix.system_index("UTQA");
    const auto t = build_table(d.matrix, utqa, sup);
    CHECK(t.rows() == 2);
    CHECK(t.cols() == 2);
    CHECK(t.n() == 100);
    CHECK(t.row_margins()[0] == 74);  // UTQA has F1 > 0 on 74 rows
    CHECK(t.row_labels() == std::vector<std::string>{"can answer", "cannot answer"});
    CHECK(t.col_labels() == std::vector<std::string>{"0", "1"});

    sup.erase(d.questions.front().id);
    CHECK_THROWS_AS(build_table(d.matrix, utqa, sup), DataError);
    CHECK_THROWS_AS(build_table(PerformanceMatrix({"A"}), 0, {}), DegenerateTableError);

    std::map<QuestionId, std::string> constant;
    for (const auto& rec : d.questions) constant[rec.id] = "x";
    CHECK(build_table(d.matrix, utqa, constant).degenerate());
}

TEST_CASE("association profile over the fixture") {
    const auto profile = association_profile(fixture::dataset(), fixture::gazetteer());
    CHECK(profile.systems.size() == 6);
    CHECK(profile.features.size() == 13);
    CHECK(profile.cells.size() == 78);
    for (const auto& cell : profile.cells) {
        CHECK(cell.n == 100);
        if (cell.result) {
            CHECK(cell.result->v >= 0.0);
            CHECK(cell.result->v <= 1.0);
        }
    }
    // no fixture question mentions money, so that column is constant
    const auto money = std::find(profile.features.begin(), profile.features.end(), FeatureGroup::Money) -
                       profile.features.begin();
    for (std::size_t s = 0; s < 6; ++s) CHECK_FALSE(profile.cell(s, money).result.has_value());
    CHECK_FALSE(profile.mean_v(money).has_value());

    const auto csv = association_csv(profile);
    CHECK(csv.rfind("system,feature,v,chi2,n\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 79);
}

TEST_CASE("single-question profiles are all degenerate") {
    const auto& d = fixture::dataset();
    Dataset one{{d.questions.front()}, d.matrix.subset({d.questions.front().id})};
    const auto profile = association_profile(one, fixture::gazetteer());
    for (const auto& cell : profile.cells) CHECK_FALSE(cell.result.has_value());
}
