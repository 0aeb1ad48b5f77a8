#include "corrembed/ingest.hpp"

#include "corrembed/weighting.hpp"
#include "oracle.hpp"

#include <doctest.h>

#include <filesystem>
#include <random>

using namespace corrembed;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;

    TempDir()
    {
        path = fs::temp_directory_path() / ("corrembed_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }

    fs::path operator/(const std::string& name) const { return path / name; }
};

void write_raw(const fs::path& path, const std::vector<std::uint8_t>& bytes)
{
    write_atomically(path, std::string(bytes.begin(), bytes.end()));
}

} // namespace

TEST_CASE("CORREMB1 header layout is little-endian and 17 bytes")
{
    Matrix m(2, 3);
    m << 1, 2, 3, 4, 5, 6;
    const auto bytes = encode_embeddings(m, Dtype::float64);
    REQUIRE(bytes.size() == 17 + 6 * 8);
    CHECK(std::string(bytes.begin(), bytes.begin() + 8) == "CORREMB1");
    CHECK(bytes[8] == 2);
    CHECK(bytes[9] == 0);
    CHECK(bytes[12] == 3);
    CHECK(bytes[16] == 1);
    // 1.0 as IEEE-754 double, little-endian.
    CHECK(bytes[17 + 7] == 0x3F);
    CHECK(bytes[17 + 6] == 0xF0);

    const auto narrow = encode_embeddings(m, Dtype::float32);
    CHECK(narrow.size() == 17 + 6 * 4);
    CHECK(narrow[16] == 0);
    // 1.0f = 0x3F800000
    CHECK(narrow[17 + 3] == 0x3F);
    CHECK(narrow[17 + 2] == 0x80);
}

TEST_CASE("CORREMB1 round-trips a 90x1280 float32 matrix through disk")
{
    TempDir dir;
    Matrix m = oracle::uniform_matrix(90, 1280, 1) * 10.0 - Matrix::Constant(90, 1280, 5.0);
    m = m.cast<float>().cast<double>();
    const auto ids = oracle::ids(90, "img");
    write_embeddings(dir / "e.bin", m, Dtype::float32);
    write_ids(dir / "e.ids", ids);
    const auto set = read_embeddings(dir / "e.bin", dir / "e.ids");
    CHECK(set.values == m);
    CHECK(set.item_ids == ids);
    CHECK(fs::file_size(dir / "e.bin") == 17 + 90 * 1280 * 4);
}

TEST_CASE("CORREMB1 encode/decode identity for float64 across shapes")
{
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 20; ++trial) {
        const Index n = 2 + static_cast<Index>(rng() % 30);
        const Index d = 1 + static_cast<Index>(rng() % 40);
        Matrix m(n, d);
        for (Index i = 0; i < m.size(); ++i) {
            m.data()[i] = normal(rng) * std::pow(10.0, static_cast<double>(rng() % 20) - 10.0);
        }
        EmbeddingFileHeader header;
        const auto bytes = encode_embeddings(m, Dtype::float64);
        CHECK(decode_embeddings(bytes, &header) == m);
        CHECK(header.n == n);
        CHECK(header.d == d);
        CHECK(encode_embeddings(decode_embeddings(bytes), Dtype::float64) == bytes);
    }
}

TEST_CASE("CORREMB1 rejects corrupt input")
{
    TempDir dir;
    Matrix m = oracle::uniform_matrix(3, 4, 2);
    auto bytes = encode_embeddings(m, Dtype::float64);
    write_ids(dir / "ids", oracle::ids(3));

    auto bad_magic = bytes;
    bad_magic[7] = 'X';
    CHECK_THROWS_WITH_AS(decode_embeddings(bad_magic), "not a CORREMB1 file", DataError);
    CHECK_THROWS_WITH_AS(decode_embeddings({'C', 'O'}), "not a CORREMB1 file", DataError);

    auto truncated = bytes;
    truncated.pop_back();
    CHECK_THROWS_WITH_AS(decode_embeddings(truncated), doctest::Contains("truncated payload"), DataError);

    auto trailing = bytes;
    trailing.push_back(0);
    CHECK_THROWS_AS(decode_embeddings(trailing), DataError);

    auto bad_dtype = bytes;
    bad_dtype[16] = 7;
    CHECK_THROWS_AS(decode_embeddings(bad_dtype), DataError);

    write_raw(dir / "empty.bin", encode_embeddings(Matrix(0, 4), Dtype::float32));
    CHECK_THROWS_WITH_AS(read_embeddings(dir / "empty.bin", dir / "ids"), doctest::Contains("n >= 2 required"),
                         DataError);

    write_raw(dir / "ok.bin", bytes);
    write_ids(dir / "two.ids", oracle::ids(2));
    CHECK_THROWS_WITH_AS(read_embeddings(dir / "ok.bin", dir / "two.ids"), doctest::Contains("2 ids for 3 rows"),
                         DataError);

    write_atomically(dir / "blank.ids", "a\n\nc\n");
    CHECK_THROWS_AS(read_embeddings(dir / "ok.bin", dir / "blank.ids"), DataError);
}

TEST_CASE("CSV embeddings import")
{
    TempDir dir;
    write_atomically(dir / "e.csv", "a,1,0\nb,0.5,0.5\r\n\nc,0,1\n");
    const auto set = read_embeddings_csv(dir / "e.csv");
    CHECK(set.item_ids == std::vector<std::string>{"a", "b", "c"});
    CHECK(set.values(1, 0) == 0.5);

    write_atomically(dir / "ragged.csv", "a,1,0\nb,1\n");
    CHECK_THROWS_AS(read_embeddings_csv(dir / "ragged.csv"), DataError);
    write_atomically(dir / "text.csv", "a,1,x\nb,1,2\n");
    CHECK_THROWS_AS(read_embeddings_csv(dir / "text.csv"), DataError);
}

TEST_CASE("annotations JSONL parsing")
{
    const auto one = parse_annotations(R"({"item_id": "x", "tags": [{"category": "Color", "name": "Red"}]})");
    REQUIRE(one.size() == 1);
    CHECK(one[0].item_id == "x");
    CHECK(one[0].tags == std::set<Tag>{{"Color", "Red"}});

    const std::string dup = "{\"item_id\": \"x\", \"tags\": []}\n{\"item_id\": \"x\", \"tags\": []}\n";
    CHECK_THROWS_WITH_AS(parse_annotations(dup), doctest::Contains("duplicate item_id 'x'"), DataError);

    const std::string broken = "{\"item_id\": \"x\", \"tags\": []}\n{\"item_id\": \n";
    CHECK_THROWS_WITH_AS(parse_annotations(broken), doctest::Contains("line 2"), DataError);
    CHECK_THROWS_AS(parse_annotations(R"({"item_id": "", "tags": []})"), DataError);
    CHECK_THROWS_AS(parse_annotations(R"({"item_id": "x"})"), DataError);
    CHECK_THROWS_AS(parse_annotations(R"({"item_id": "x", "tags": [{"category": "C"}]})"), DataError);
}

TEST_CASE("histories JSONL parsing")
{
    const auto two = parse_histories("{\"customer_id\": \"a\", \"item_ids\": [\"x\", \"y\"]}\n"
                                     "{\"customer_id\": \"b\", \"item_ids\": []}\n");
    REQUIRE(two.size() == 2);
    CHECK(two[0].item_ids == std::vector<std::string>{"x", "y"});
    CHECK(two[1].item_ids.empty());
    CHECK_THROWS_WITH_AS(parse_histories("{\"customer_id\": \"a\", \"item_ids\": [1]}"), doctest::Contains("line 1"),
                         DataError);
    CHECK_THROWS_AS(parse_histories("not json"), DataError);
}

TEST_CASE("JSONL write/read round-trips random records")
{
    TempDir dir;
    std::mt19937_64 rng(9);
    const auto word = [&] {
        static const char* parts[] = {"Red", "Ä", "\"q\"", "tab\t", "x", "Faux fur", "3XL-4XL", "ü/ß"};
        return std::string(parts[rng() % 8]) + std::to_string(rng() % 5);
    };
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<ItemAnnotation> items;
        for (int i = 0; i < 12; ++i) {
            ItemAnnotation item{"id-" + std::to_string(trial) + "-" + std::to_string(i) + word(), {}};
            for (std::size_t k = rng() % 4; k > 0; --k) {
                item.tags.insert({word(), word()});
            }
            items.push_back(item);
        }
        write_annotations(dir / "a.jsonl", items);
        const auto back = read_annotations(dir / "a.jsonl");
        REQUIRE(back.size() == items.size());
        for (std::size_t i = 0; i < items.size(); ++i) {
            CHECK(back[i].item_id == items[i].item_id);
            CHECK(back[i].tags == items[i].tags);
        }
        CHECK(format_annotations(back) == read_text(dir / "a.jsonl"));

        std::vector<RentalHistory> histories;
        for (int k = 0; k < 6; ++k) {
            RentalHistory h{word(), {}};
            for (std::size_t r = rng() % 5; r > 0; --r) {
                h.item_ids.push_back(word());
            }
            histories.push_back(h);
        }
        write_histories(dir / "h.jsonl", histories);
        const auto hb = read_histories(dir / "h.jsonl");
        REQUIRE(hb.size() == histories.size());
        for (std::size_t i = 0; i < histories.size(); ++i) {
            CHECK(hb[i].customer_id == histories[i].customer_id);
            CHECK(hb[i].item_ids == histories[i].item_ids);
        }
        CHECK(format_histories(hb) == read_text(dir / "h.jsonl"));
    }
}

TEST_CASE("histories from disk reproduce the two-customer entropy")
{
    TempDir dir;
    write_annotations(dir / "a.jsonl", {{"r", {{"Color", "Red"}}}, {"b", {{"Color", "Blue"}}}});
    write_histories(dir / "h.jsonl", {{"loyal", {"r", "r"}}, {"mixed", {"r", "b"}}, {"idle", {}}});
    const auto items = read_annotations(dir / "a.jsonl");
    const auto histories = read_histories(dir / "h.jsonl");
    const auto h = category_entropy(histories, index_annotations(items), "Color");
    CHECK(h.value == doctest::Approx(std::log(2.0) / 2.0).epsilon(1e-15));
    CHECK(h.customers_counted == 2);
}

TEST_CASE("weights JSON round-trip and validation")
{
    TempDir dir;
    CategoryWeights w{{{"Color", 0.25}, {"Fit", 1.0}, {"Length", 0.0}}, {}};
    write_atomically(dir / "w.json", format_weights(w));
    CHECK(read_weights(dir / "w.json").values == w.values);
    write_atomically(dir / "bad.json", R"({"Color": 1.5})");
    CHECK_THROWS_AS(read_weights(dir / "bad.json"), DataError);
    write_atomically(dir / "list.json", "[1]");
    CHECK_THROWS_AS(read_weights(dir / "list.json"), DataError);
}

TEST_CASE("published result fixtures load")
{
    const auto table2 = read_output_fixture(CORREMBED_FIXTURE_DIR "/table2.tsv");
    REQUIRE(table2.size() == 19);
    CHECK(table2.front().model == "random");
    CHECK(table2.back().model == "ViT H 14 E2E");
    CHECK(table2.back().acc1 == 88.552);
    CHECK(table2[1].unweighted == -0.0032);
    for (const auto& row : table2) {
        if (row.acc1 != 0.0) {
            CHECK(row.acc1 <= row.acc5);
        }
    }

    const auto table3 = read_penultimate_fixture(CORREMBED_FIXTURE_DIR "/table3.tsv");
    REQUIRE(table3.size() == 17);
    CHECK_FALSE(table3[1].corrembed.has_value());
    CHECK(table3.back().embedding_shape == "(90, 1280)");
    CHECK(*table3.back().corrembed == 0.4288);
}

TEST_CASE("format_double is shortest round-trip")
{
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}
