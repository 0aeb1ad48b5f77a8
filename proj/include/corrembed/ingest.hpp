#ifndef CORREMBED_INGEST_HPP
#define CORREMBED_INGEST_HPP

#include "corrembed/tagspace.hpp"
#include "corrembed/types.hpp"
#include "corrembed/weighting.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace corrembed {

// CORREMB1 layout, all integers little-endian:
//   offset 0  : 8 bytes  "CORREMB1"
//   offset 8  : u32      n (rows)
//   offset 12 : u32      d (columns)
//   offset 16 : u8       dtype (0 = float32, 1 = float64)
//   offset 17 : n*d values, row-major, IEEE-754 little-endian

inline constexpr std::array<char, 8> embedding_magic{'C', 'O', 'R', 'R', 'E', 'M', 'B', '1'};
inline constexpr std::size_t embedding_header_size = 17;

enum class Dtype : std::uint8_t { float32 = 0, float64 = 1 };

struct EmbeddingFileHeader {
    std::uint32_t n = 0;
    std::uint32_t d = 0;
    Dtype dtype = Dtype::float32;
};

std::vector<std::uint8_t> encode_embeddings(const Matrix& values, Dtype dtype);
/// Decodes a CORREMB1 byte buffer; float32 payloads are widened to double.
Matrix decode_embeddings(const std::vector<std::uint8_t>& bytes, EmbeddingFileHeader* header = nullptr);

void write_embeddings(const std::filesystem::path& path, const Matrix& values, Dtype dtype);
void write_ids(const std::filesystem::path& path, const std::vector<std::string>& ids);
std::vector<std::string> read_ids(const std::filesystem::path& path);

EmbeddingSet read_embeddings(const std::filesystem::path& path, const std::filesystem::path& ids_path);

/// `item_id,v1,...,vd` per line; no header row.
EmbeddingSet read_embeddings_csv(const std::filesystem::path& path);

std::vector<ItemAnnotation> parse_annotations(const std::string& text);
std::string format_annotations(const std::vector<ItemAnnotation>& annotations);
std::vector<ItemAnnotation> read_annotations(const std::filesystem::path& path);
void write_annotations(const std::filesystem::path& path, const std::vector<ItemAnnotation>& annotations);

std::vector<RentalHistory> parse_histories(const std::string& text);
std::string format_histories(const std::vector<RentalHistory>& histories);
std::vector<RentalHistory> read_histories(const std::filesystem::path& path);
void write_histories(const std::filesystem::path& path, const std::vector<RentalHistory>& histories);

/// JSON object category -> weight.
CategoryWeights read_weights(const std::filesystem::path& path);
std::string format_weights(const CategoryWeights& weights);

/// One Table-2-style row: accuracy and CorrEmbed columns for one model.
struct FixtureRow {
    std::string model;
    double acc1 = 0.0;
    double acc5 = 0.0;
    double corrembed = 0.0;
    double unweighted = 0.0;
    double random = 0.0;
    double shuffled = 0.0;
};

/// One Table-3-style row: penultimate-layer score (absent when not measurable).
struct PenultimateRow {
    std::string model;
    std::string params;
    std::optional<double> corrembed;
    double inference_time = 0.0;
    std::string embedding_shape;
};

std::vector<FixtureRow> read_output_fixture(const std::filesystem::path& path);
std::vector<PenultimateRow> read_penultimate_fixture(const std::filesystem::path& path);

/// Whole file as bytes / text.
std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);

/// Write to a sibling temporary file, then rename over `path`.
void write_atomically(const std::filesystem::path& path, const std::string& contents);

/// Shortest round-trip decimal form.
std::string format_double(double value);

} // namespace corrembed

#endif // CORREMBED_INGEST_HPP
