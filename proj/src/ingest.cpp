#include "corrembed/ingest.hpp"

#include <json.hpp>

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <unistd.h>

namespace corrembed {

namespace {

using json = nlohmann::json;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    for (int shift = 0; shift < 32; shift += 8) {
        out.push_back(static_cast<std::uint8_t>(v >> shift));
    }
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v)
{
    for (int shift = 0; shift < 64; shift += 8) {
        out.push_back(static_cast<std::uint8_t>(v >> shift));
    }
}

std::uint32_t get_u32(const std::uint8_t* p)
{
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) {
        v = (v << 8) | p[i];
    }
    return v;
}

std::uint64_t get_u64(const std::uint8_t* p)
{
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
        v = (v << 8) | p[i];
    }
    return v;
}

std::vector<std::string> split_lines(const std::string& text)
{
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        const auto end = text.find('\n', start);
        if (end == std::string::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

std::vector<std::string> split_tabs(const std::string& line)
{
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const auto end = line.find('\t', start);
        fields.push_back(line.substr(start, end == std::string::npos ? std::string::npos : end - start));
        if (end == std::string::npos) {
            return fields;
        }
        start = end + 1;
    }
}

bool is_blank(const std::string& line)
{
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

double parse_double(const std::string& text, const std::string& where)
{
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    while (first < last && *first == ' ') {
        ++first;
    }
    if (first < last && *first == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw DataError(where + ": not a number: '" + text + "'");
    }
    return value;
}

const json& require_field(const json& object, const char* key, std::size_t line)
{
    const auto it = object.find(key);
    if (it == object.end()) {
        throw DataError("line " + std::to_string(line) + ": missing field '" + key + "'");
    }
    return *it;
}

std::string require_string(const json& value, const char* key, std::size_t line)
{
    if (!value.is_string()) {
        throw DataError("line " + std::to_string(line) + ": field '" + key + "' must be a string");
    }
    return value.get<std::string>();
}

json parse_line(const std::string& line, std::size_t number)
{
    try {
        auto value = json::parse(line);
        if (!value.is_object()) {
            throw DataError("line " + std::to_string(number) + ": expected a JSON object");
        }
        return value;
    } catch (const json::parse_error& e) {
        throw DataError("line " + std::to_string(number) + ": malformed JSON: " + e.what());
    }
}

} // namespace

std::vector<std::uint8_t> encode_embeddings(const Matrix& values, Dtype dtype)
{
    constexpr auto limit = static_cast<Index>(std::numeric_limits<std::uint32_t>::max());
    if (values.rows() > limit || values.cols() > limit) {
        throw DataError("matrix too large for CORREMB1");
    }
    const std::size_t width = dtype == Dtype::float32 ? 4 : 8;
    std::vector<std::uint8_t> out;
    out.reserve(embedding_header_size + static_cast<std::size_t>(values.size()) * width);
    for (char ch : embedding_magic) {
        out.push_back(static_cast<std::uint8_t>(ch));
    }
    put_u32(out, static_cast<std::uint32_t>(values.rows()));
    put_u32(out, static_cast<std::uint32_t>(values.cols()));
    out.push_back(static_cast<std::uint8_t>(dtype));
    for (Index r = 0; r < values.rows(); ++r) {
        for (Index c = 0; c < values.cols(); ++c) {
            if (dtype == Dtype::float32) {
                put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(values(r, c))));
            } else {
                put_u64(out, std::bit_cast<std::uint64_t>(values(r, c)));
            }
        }
    }
    return out;
}

Matrix decode_embeddings(const std::vector<std::uint8_t>& bytes, EmbeddingFileHeader* header)
{
    if (bytes.size() < embedding_magic.size() ||
        std::memcmp(bytes.data(), embedding_magic.data(), embedding_magic.size()) != 0) {
        throw DataError("not a CORREMB1 file");
    }
    if (bytes.size() < embedding_header_size) {
        throw DataError("truncated header");
    }
    EmbeddingFileHeader parsed;
    parsed.n = get_u32(bytes.data() + 8);
    parsed.d = get_u32(bytes.data() + 12);
    const std::uint8_t dtype = bytes[16];
    if (dtype > 1) {
        throw DataError("unknown dtype " + std::to_string(dtype));
    }
    parsed.dtype = static_cast<Dtype>(dtype);

    const std::size_t width = parsed.dtype == Dtype::float32 ? 4 : 8;
    const std::size_t expected = std::size_t{parsed.n} * std::size_t{parsed.d} * width;
    const std::size_t payload = bytes.size() - embedding_header_size;
    if (payload < expected) {
        throw DataError("truncated payload: expected " + std::to_string(expected) + " bytes, found " +
                        std::to_string(payload));
    }
    if (payload > expected) {
        throw DataError("trailing bytes after payload: expected " + std::to_string(expected) + " bytes, found " +
                        std::to_string(payload));
    }

    Matrix values(parsed.n, parsed.d);
    const std::uint8_t* p = bytes.data() + embedding_header_size;
    for (Index r = 0; r < values.rows(); ++r) {
        for (Index c = 0; c < values.cols(); ++c, p += width) {
            values(r, c) = parsed.dtype == Dtype::float32 ? static_cast<double>(std::bit_cast<float>(get_u32(p)))
                                                          : std::bit_cast<double>(get_u64(p));
        }
    }
    if (header) {
        *header = parsed;
    }
    return values;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_atomically(const std::filesystem::path& path, const std::string& contents)
{
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw DataError("cannot write " + tmp.string());
        }
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) {
            std::error_code ignored;
            std::filesystem::remove(tmp, ignored);
            throw DataError("write failed for " + path.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

void write_embeddings(const std::filesystem::path& path, const Matrix& values, Dtype dtype)
{
    const auto bytes = encode_embeddings(values, dtype);
    write_atomically(path, std::string(bytes.begin(), bytes.end()));
}

void write_ids(const std::filesystem::path& path, const std::vector<std::string>& ids)
{
    std::string text;
    for (const auto& id : ids) {
        if (id.empty() || id.find('\n') != std::string::npos) {
            throw DataError("item ids must be non-empty single-line strings");
        }
        text += id;
        text += '\n';
    }
    write_atomically(path, text);
}

std::vector<std::string> read_ids(const std::filesystem::path& path)
{
    auto lines = split_lines(read_text(path));
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) {
            throw DataError(path.string() + ": empty id on line " + std::to_string(i + 1));
        }
    }
    return lines;
}

EmbeddingSet read_embeddings(const std::filesystem::path& path, const std::filesystem::path& ids_path)
{
    EmbeddingFileHeader header;
    Matrix values = decode_embeddings(read_bytes(path), &header);
    if (header.n < 2) {
        throw DataError("n >= 2 required, file has n = " + std::to_string(header.n));
    }
    auto ids = read_ids(ids_path);
    if (ids.size() != header.n) {
        throw DataError("id count mismatch: " + std::to_string(ids.size()) + " ids for " +
                        std::to_string(header.n) + " rows");
    }
    EmbeddingSet set{std::move(ids), std::move(values)};
    set.validate();
    return set;
}

EmbeddingSet read_embeddings_csv(const std::filesystem::path& path)
{
    std::vector<std::string> ids;
    std::vector<std::vector<double>> rows;
    const auto lines = split_lines(read_text(path));
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (is_blank(lines[i])) {
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream stream(lines[i]);
        for (std::string field; std::getline(stream, field, ',');) {
            if (!field.empty() && field.back() == '\r') {
                field.pop_back();
            }
            fields.push_back(field);
        }
        const std::string where = path.string() + ":" + std::to_string(i + 1);
        if (fields.size() < 2 || fields[0].empty()) {
            throw DataError(where + ": expected item_id followed by at least one value");
        }
        std::vector<double> row;
        for (std::size_t f = 1; f < fields.size(); ++f) {
            row.push_back(parse_double(fields[f], where));
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw DataError(where + ": row has " + std::to_string(row.size()) + " values, expected " +
                            std::to_string(rows.front().size()));
        }
        ids.push_back(fields[0]);
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2) {
        throw DataError("n >= 2 required, " + path.string() + " has " + std::to_string(rows.size()) + " rows");
    }
    Matrix values(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            values(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
        }
    }
    EmbeddingSet set{std::move(ids), std::move(values)};
    set.validate();
    return set;
}

std::vector<ItemAnnotation> parse_annotations(const std::string& text)
{
    std::vector<ItemAnnotation> out;
    std::set<std::string> seen;
    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (is_blank(lines[i])) {
            continue;
        }
        const std::size_t number = i + 1;
        const json object = parse_line(lines[i], number);
        ItemAnnotation annotation;
        annotation.item_id = require_string(require_field(object, "item_id", number), "item_id", number);
        if (annotation.item_id.empty()) {
            throw DataError("line " + std::to_string(number) + ": empty item_id");
        }
        const json& tags = require_field(object, "tags", number);
        if (!tags.is_array()) {
            throw DataError("line " + std::to_string(number) + ": field 'tags' must be an array");
        }
        for (const auto& tag : tags) {
            if (!tag.is_object()) {
                throw DataError("line " + std::to_string(number) + ": each tag must be an object");
            }
            annotation.tags.insert({require_string(require_field(tag, "category", number), "category", number),
                                    require_string(require_field(tag, "name", number), "name", number)});
        }
        if (!seen.insert(annotation.item_id).second) {
            throw DataError("line " + std::to_string(number) + ": duplicate item_id '" + annotation.item_id + "'");
        }
        out.push_back(std::move(annotation));
    }
    return out;
}

std::string format_annotations(const std::vector<ItemAnnotation>& annotations)
{
    std::string text;
    for (const auto& annotation : annotations) {
        json tags = json::array();
        for (const auto& tag : annotation.tags) {
            tags.push_back({{"category", tag.category}, {"name", tag.name}});
        }
        text += json{{"item_id", annotation.item_id}, {"tags", std::move(tags)}}.dump();
        text += '\n';
    }
    return text;
}

std::vector<ItemAnnotation> read_annotations(const std::filesystem::path& path)
{
    try {
        return parse_annotations(read_text(path));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_annotations(const std::filesystem::path& path, const std::vector<ItemAnnotation>& annotations)
{
    write_atomically(path, format_annotations(annotations));
}

std::vector<RentalHistory> parse_histories(const std::string& text)
{
    std::vector<RentalHistory> out;
    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (is_blank(lines[i])) {
            continue;
        }
        const std::size_t number = i + 1;
        const json object = parse_line(lines[i], number);
        RentalHistory history;
        history.customer_id = require_string(require_field(object, "customer_id", number), "customer_id", number);
        const json& items = require_field(object, "item_ids", number);
        if (!items.is_array()) {
            throw DataError("line " + std::to_string(number) + ": field 'item_ids' must be an array");
        }
        for (const auto& item : items) {
            history.item_ids.push_back(require_string(item, "item_ids", number));
        }
        out.push_back(std::move(history));
    }
    return out;
}

std::string format_histories(const std::vector<RentalHistory>& histories)
{
    std::string text;
    for (const auto& history : histories) {
        text += json{{"customer_id", history.customer_id}, {"item_ids", history.item_ids}}.dump();
        text += '\n';
    }
    return text;
}

std::vector<RentalHistory> read_histories(const std::filesystem::path& path)
{
    try {
        return parse_histories(read_text(path));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_histories(const std::filesystem::path& path, const std::vector<RentalHistory>& histories)
{
    write_atomically(path, format_histories(histories));
}

CategoryWeights read_weights(const std::filesystem::path& path)
{
    json object;
    try {
        object = json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw DataError(path.string() + ": malformed JSON: " + e.what());
    }
    if (!object.is_object()) {
        throw DataError(path.string() + ": expected a JSON object of category weights");
    }
    CategoryWeights weights;
    for (const auto& [category, value] : object.items()) {
        if (!value.is_number()) {
            throw DataError(path.string() + ": weight of '" + category + "' is not a number");
        }
        const double w = value.get<double>();
        if (!(w >= 0.0 && w <= 1.0)) {
            throw DataError(path.string() + ": weight of '" + category + "' outside [0, 1]");
        }
        weights.values[category] = w;
    }
    return weights;
}

std::string format_weights(const CategoryWeights& weights)
{
    json object = json::object();
    for (const auto& [category, value] : weights.values) {
        object[category] = value;
    }
    return object.dump(2) + "\n";
}

std::vector<FixtureRow> read_output_fixture(const std::filesystem::path& path)
{
    const auto lines = split_lines(read_text(path));
    std::vector<FixtureRow> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (is_blank(lines[i])) {
            continue;
        }
        const auto f = split_tabs(lines[i]);
        const std::string where = path.string() + ":" + std::to_string(i + 1);
        if (f.size() != 7) {
            throw DataError(where + ": expected 7 columns, found " + std::to_string(f.size()));
        }
        rows.push_back({f[0], parse_double(f[1], where), parse_double(f[2], where), parse_double(f[3], where),
                        parse_double(f[4], where), parse_double(f[5], where), parse_double(f[6], where)});
    }
    return rows;
}

std::vector<PenultimateRow> read_penultimate_fixture(const std::filesystem::path& path)
{
    const auto lines = split_lines(read_text(path));
    std::vector<PenultimateRow> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (is_blank(lines[i])) {
            continue;
        }
        const auto f = split_tabs(lines[i]);
        const std::string where = path.string() + ":" + std::to_string(i + 1);
        if (f.size() != 5) {
            throw DataError(where + ": expected 5 columns, found " + std::to_string(f.size()));
        }
        PenultimateRow row{f[0], f[1], std::nullopt, parse_double(f[3], where), f[4]};
        if (f[2] != "N/A") {
            row.corrembed = parse_double(f[2], where);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string format_double(double value)
{
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, ptr);
}

} // namespace corrembed
