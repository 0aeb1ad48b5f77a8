#include "corrembed/simcore.hpp"

#include "oracle.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace corrembed;

namespace {

Vector vec(std::initializer_list<double> values)
{
    Vector v(static_cast<Index>(values.size()));
    std::copy(values.begin(), values.end(), v.data());
    return v;
}

EmbeddingSet three_rows()
{
    Matrix m(3, 2);
    m << 1, 0, 1, 1, 0, 1;
    return {{"r0", "r1", "r2"}, m};
}

} // namespace

TEST_CASE("cosine examples")
{
    CHECK(cosine(vec({1, 0}), vec({0, 1})) == 0.0);
    CHECK(cosine(vec({2, 0}), vec({1, 0})) == 1.0);
    const double expected = oracle::cosine({1, 1}, {1, 0});
    CHECK(expected == doctest::Approx(0.7071067811865476).epsilon(1e-15));
    CHECK(cosine(vec({1, 1}), vec({1, 0})) == doctest::Approx(expected).epsilon(1e-15));
    CHECK(cosine(vec({1, 1}), vec({-1, -1})) == -1.0);

    // Row and column operands mix.
    Matrix m(2, 2);
    m << 1, 1, 1, 0;
    CHECK(cosine(m.row(0), vec({1, 0})) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("cosine clamps rounding overshoot")
{
    for (double s : {1e-7, 0.1, 3.3, 1e5}) {
        const Vector a = vec({0.1, 0.2, 0.3}) * s;
        const double c = cosine(a, a * 7.0);
        CHECK(c <= 1.0);
        CHECK(c == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("cosine reports the zero-norm side")
{
    try {
        cosine(vec({0, 0}), vec({1, 0}));
        FAIL("expected throw");
    } catch (const ZeroNormError& e) {
        CHECK(e.side() == Operand::left);
    }
    try {
        cosine(vec({1, 0}), vec({0, 0}));
        FAIL("expected throw");
    } catch (const ZeroNormError& e) {
        CHECK(e.side() == Operand::right);
    }
    CHECK_THROWS_AS(cosine(vec({1, 0}), vec({1, 0, 0})), DataError);
}

TEST_CASE("similarity_profile examples")
{
    Matrix m(2, 2);
    m << 1, 0, 0, 1;
    const EmbeddingSet two{{"a", "b"}, m};
    const Vector p = similarity_profile(two, 0);
    REQUIRE(p.size() == 1);
    CHECK(p[0] == 0.0);
    CHECK(similarity_profile(two, 0, true).size() == 2);

    const auto three = three_rows();
    const Vector mid = similarity_profile(three, 1);
    REQUIRE(mid.size() == 2);
    CHECK(mid[0] == doctest::Approx(0.7071067811865476).epsilon(1e-15));
    CHECK(mid[1] == doctest::Approx(0.7071067811865476).epsilon(1e-15));

    Matrix dup(3, 3);
    dup << 1, 2, 3, 4, 5, 6, 1, 2, 3;
    const EmbeddingSet with_dup{{"a", "b", "c"}, dup};
    CHECK(similarity_profile(with_dup, 0)[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(similarity_profile(with_dup, 3), DataError);
}

TEST_CASE("similarity_profile names the zero row")
{
    Matrix m(3, 2);
    m << 1, 0, 0, 0, 0, 1;
    const TagSet set{{"a", "untagged", "c"}, m};
    try {
        similarity_profile(set, 0);
        FAIL("expected throw");
    } catch (const ZeroNormError& e) {
        CHECK(e.item_id() == "untagged");
    }
}

TEST_CASE("pearson examples")
{
    CHECK(*pearson(vec({1, 2, 3}), vec({2, 4, 6})) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(*pearson(vec({1, 2, 3}), vec({3, 2, 1})) == doctest::Approx(-1.0).epsilon(1e-15));
    const auto expected = oracle::pearson({1, 2, 3, 4}, {1, 3, 2, 4});
    CHECK(*expected == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(*pearson(vec({1, 2, 3, 4}), vec({1, 3, 2, 4})) == doctest::Approx(*expected).epsilon(1e-15));

    CHECK_FALSE(pearson(vec({1, 1, 1}), vec({1, 2, 3})).has_value());
    CHECK_FALSE(pearson(vec({1, 2, 3}), vec({0.1, 0.1, 0.1})).has_value());
    CHECK_THROWS_AS(pearson(vec({1, 2}), vec({1, 2, 3})), DataError);
    CHECK_THROWS_AS(pearson(vec({1}), vec({1})), DataError);
}

TEST_CASE("pearson matches the oracle and stays in [-1,1]")
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 200; ++trial) {
        const Index n = 2 + static_cast<Index>(rng() % 50);
        Vector x(n), y(n);
        std::vector<double> xs, ys;
        for (Index i = 0; i < n; ++i) {
            x[i] = normal(rng) * 1e3 + 5e3;
            y[i] = 0.3 * x[i] + normal(rng) * 500;
            xs.push_back(x[i]);
            ys.push_back(y[i]);
        }
        const auto r = pearson(x, y);
        REQUIRE(r.has_value());
        CHECK(*r >= -1.0);
        CHECK(*r <= 1.0);
        CHECK(*r == doctest::Approx(*oracle::pearson(xs, ys)).epsilon(1e-10));
    }
}

TEST_CASE("corr_embed identity case is exactly one")
{
    const Matrix tags = oracle::binary_matrix(60, 12, 0.3, 1);
    const auto ids = oracle::ids(60);
    const auto result = corr_embed(EmbeddingSet{ids, tags}, TagSet{ids, tags});
    CHECK(std::abs(result.mean - 1.0) < 1e-12);
    CHECK(result.n_scored + result.n_skipped == 60);

    CorrEmbedOptions with_self;
    with_self.include_self = true;
    CHECK(std::abs(corr_embed(EmbeddingSet{ids, tags}, TagSet{ids, tags}, with_self).mean - 1.0) < 1e-12);
}

TEST_CASE("corr_embed with identical tag rows is degenerate")
{
    Matrix tags = Matrix::Ones(10, 4);
    const auto ids = oracle::ids(10);
    const EmbeddingSet images{ids, oracle::uniform_matrix(10, 5, 2)};
    CHECK_THROWS_AS(corr_embed(images, TagSet{ids, tags}), DegenerateError);
}

TEST_CASE("corr_embed on independent random data is near zero")
{
    const auto ids = oracle::ids(500);
    const EmbeddingSet images{ids, oracle::uniform_matrix(500, 64, 11)};
    const TagSet tags{ids, oracle::binary_matrix(500, 30, 0.2, 12)};
    const auto result = corr_embed(images, tags);
    CHECK(std::abs(result.mean) < 0.05);
}

TEST_CASE("corr_embed agrees with the naive double loop")
{
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const Index n = 40 + static_cast<Index>(seed) * 50;
        const auto ids = oracle::ids(static_cast<std::size_t>(n));
        Matrix tags = oracle::binary_matrix(n, 15, 0.25, seed);
        Matrix images = tags * oracle::uniform_matrix(15, 20, seed + 100) + 0.5 * oracle::uniform_matrix(n, 20, seed + 7);
        for (bool include_self : {false, true}) {
            CorrEmbedOptions options;
            options.include_self = include_self;
            const auto fast = corr_embed(EmbeddingSet{ids, images}, TagSet{ids, tags}, options);
            const auto naive = oracle::corr_embed(oracle::to_rows(images), oracle::to_rows(tags), include_self);
            CHECK(fast.n_scored == naive.scored);
            CHECK(std::abs(fast.mean - naive.mean) < 1e-12);
            for (std::size_t i = 0; i < fast.per_item.size(); ++i) {
                REQUIRE(fast.per_item[i].correlation.has_value() == naive.per_item[i].has_value());
                if (naive.per_item[i]) {
                    CHECK(std::abs(*fast.per_item[i].correlation - *naive.per_item[i]) < 1e-12);
                }
            }
        }
    }
}

TEST_CASE("corr_embed is bit-identical across thread counts")
{
    const auto ids = oracle::ids(150);
    const Matrix tags = oracle::binary_matrix(150, 20, 0.2, 5);
    const EmbeddingSet images{ids, tags * oracle::uniform_matrix(20, 32, 6) + oracle::uniform_matrix(150, 32, 7)};
    CorrEmbedOptions options;
    options.threads = 1;
    const auto serial = corr_embed(images, TagSet{ids, tags}, options);
    for (unsigned threads : {2u, 3u, 8u}) {
        options.threads = threads;
        const auto parallel = corr_embed(images, TagSet{ids, tags}, options);
        CHECK(parallel.mean == serial.mean);
        for (std::size_t i = 0; i < serial.per_item.size(); ++i) {
            CHECK(parallel.per_item[i].correlation == serial.per_item[i].correlation);
        }
    }
}

TEST_CASE("corr_embed invariances: row rescaling and common permutation")
{
    const Index n = 80;
    const auto ids = oracle::ids(n);
    const Matrix tags = oracle::binary_matrix(n, 16, 0.25, 21);
    const Matrix images = tags * oracle::uniform_matrix(16, 24, 22) + oracle::uniform_matrix(n, 24, 23);
    const double base = corr_embed(EmbeddingSet{ids, images}, TagSet{ids, tags}).mean;

    std::mt19937_64 rng(24);
    std::uniform_real_distribution<double> scale(0.01, 100.0);
    Matrix rescaled = images;
    for (Index r = 0; r < n; ++r) {
        rescaled.row(r) *= scale(rng);
    }
    CHECK(std::abs(corr_embed(EmbeddingSet{ids, rescaled}, TagSet{ids, tags}).mean - base) < 1e-12);

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    Matrix pi(n, images.cols()), pt(n, tags.cols());
    std::vector<std::string> pids;
    for (Index r = 0; r < n; ++r) {
        pi.row(r) = images.row(order[static_cast<std::size_t>(r)]);
        pt.row(r) = tags.row(order[static_cast<std::size_t>(r)]);
        pids.push_back(ids[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])]);
    }
    CHECK(std::abs(corr_embed(EmbeddingSet{pids, pi}, TagSet{pids, pt}).mean - base) < 1e-12);
}

TEST_CASE("corr_embed reports every correlation in [-1,1]")
{
    const auto ids = oracle::ids(100);
    const auto result = corr_embed(EmbeddingSet{ids, oracle::uniform_matrix(100, 8, 30) - Matrix::Constant(100, 8, 0.5)},
                                   TagSet{ids, oracle::binary_matrix(100, 10, 0.3, 31)});
    double sum = 0.0;
    for (const auto& item : result.per_item) {
        REQUIRE(item.correlation.has_value());
        CHECK(*item.correlation >= -1.0);
        CHECK(*item.correlation <= 1.0);
        sum += *item.correlation;
    }
    CHECK(result.mean == doctest::Approx(sum / 100.0).epsilon(1e-14));
}

TEST_CASE("corr_embed sampling is reproducible and sized")
{
    const auto ids = oracle::ids(120);
    const Matrix tags = oracle::binary_matrix(120, 12, 0.3, 40);
    const EmbeddingSet images{ids, tags + 0.3 * oracle::uniform_matrix(120, 12, 41)};
    CorrEmbedOptions options;
    options.sample = 25;
    options.seed = 9;
    const auto a = corr_embed(images, TagSet{ids, tags}, options);
    const auto b = corr_embed(images, TagSet{ids, tags}, options);
    CHECK(a.per_item.size() == 25);
    CHECK(a.mean == b.mean);
    for (std::size_t i = 1; i < a.per_item.size(); ++i) {
        CHECK(images.find(a.per_item[i - 1].item_id) < images.find(a.per_item[i].item_id));
    }
    options.seed = 10;
    const auto c = corr_embed(images, TagSet{ids, tags}, options);
    bool differs = false;
    for (std::size_t i = 0; i < c.per_item.size(); ++i) {
        differs = differs || c.per_item[i].item_id != a.per_item[i].item_id;
    }
    CHECK(differs);

    options.sample = 0;
    CHECK_THROWS_AS(corr_embed(images, TagSet{ids, tags}, options), DataError);
}

TEST_CASE("corr_embed input validation")
{
    const Matrix m = oracle::uniform_matrix(4, 3, 50);
    CHECK_THROWS_WITH_AS(corr_embed(EmbeddingSet{{"a", "b", "c", "d"}, m}, TagSet{{"a", "b", "x", "d"}, m}),
                         doctest::Contains("row 2"), DataError);
    CHECK_THROWS_AS(corr_embed(EmbeddingSet{{"a", "b"}, m.topRows(2)}, TagSet{{"a", "b"}, m.topRows(2)}), DataError);
    CorrEmbedOptions self;
    self.include_self = true;
    CHECK_NOTHROW(corr_embed(EmbeddingSet{{"a", "b"}, m.topRows(2)}, TagSet{{"a", "b"}, m.topRows(2)}, self));

    Matrix nan = m;
    nan(1, 1) = std::nan("");
    CHECK_THROWS_AS(corr_embed(EmbeddingSet{{"a", "b", "c", "d"}, nan}, TagSet{{"a", "b", "c", "d"}, m}), DataError);
}

TEST_CASE("zero rows error by default and can be dropped")
{
    const auto ids = oracle::ids(30);
    Matrix tags = oracle::binary_matrix(30, 8, 0.3, 60);
    tags.row(4).setZero();
    const EmbeddingSet images{ids, tags + 0.2 * oracle::uniform_matrix(30, 8, 61)};
    CHECK_THROWS_WITH_AS(corr_embed(images, TagSet{ids, tags}), doctest::Contains("item4"), ZeroNormError);

    CorrEmbedOptions drop;
    drop.zero_rows = ZeroRowPolicy::drop;
    const auto result = corr_embed(images, TagSet{ids, tags}, drop);
    CHECK(result.dropped == std::vector<std::string>{"item4"});
    CHECK(result.per_item.size() == 29);
}
