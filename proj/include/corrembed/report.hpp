#ifndef CORREMBED_REPORT_HPP
#define CORREMBED_REPORT_HPP

#include "corrembed/controls.hpp"
#include "corrembed/ingest.hpp"
#include "corrembed/simcore.hpp"
#include "corrembed/tagspace.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace corrembed {

// ---------------------------------------------------------------------------
// Meta-correlation over published result tables

/// Model-keyed table of numeric columns; a missing cell is nullopt.
struct MetaTable {
    std::vector<std::string> models;
    std::map<std::string, std::vector<std::optional<double>>> columns;

    std::size_t size() const { return models.size(); }
};

/// Columns: acc1, acc5, corrembed, unweighted, random, shuffled.
MetaTable to_meta_table(const std::vector<FixtureRow>& rows);

/// Left join by model name, adding the penultimate score as column `penultimate`.
MetaTable join_penultimate(MetaTable table, const std::vector<PenultimateRow>& rows);

struct MetaCorrOptions {
    std::set<std::string> exclude;
    /// Keep rows without accuracy (acc1 == acc5 == 0); they are dropped by default.
    bool include_controls = false;
    /// Only rows with a value in every listed column take part.
    std::vector<std::string> require_columns;
};

struct MetaCorrResult {
    double r = 0.0;
    std::vector<std::string> models;
};

/// Pearson correlation of two columns over the rows that survive exclusion and have both cells.
MetaCorrResult meta_corr(const MetaTable& table, const std::string& x_col, const std::string& y_col,
                         const MetaCorrOptions& options = {});

// ---------------------------------------------------------------------------
// Score reports

/// One configuration scored under the four tag-side settings.
struct ScoreRow {
    std::string configuration;
    double corrembed = 0.0;
    double unweighted = 0.0;
    double random = 0.0;
    double shuffled = 0.0;
};

struct ScoreReport {
    std::string label;
    /// Rows: the real embeddings, then random and shuffled embedding controls.
    std::vector<ScoreRow> rows;
    std::size_t n_scored = 0;
    std::size_t n_skipped = 0;
    double wall_seconds = 0.0;
    CorrEmbedResult weighted;
};

struct ScoreConfig {
    std::string label = "embeddings";
    CorrEmbedOptions corr;
    std::uint64_t control_seed = 0;
    std::size_t control_seeds = 3;
    /// Skip the random/shuffled embedding rows.
    bool skip_control_rows = false;
};

/**
 * Score embeddings against weighted and unweighted tag sets plus the
 * random-tag and shuffled-tag columns; with control rows enabled the same
 * four columns are repeated for random and shuffled embeddings.
 *
 * Passing no weights scores the unweighted tag set in both columns.
 */
ScoreReport score_dataset(const EmbeddingSet& images, const std::vector<ItemAnnotation>& annotations,
                          const TagVocabulary& vocab, const CategoryWeights* weights, const ScoreConfig& config);

std::string format_score_tsv(const ScoreReport& report);
std::string format_score_json(const ScoreReport& report, bool per_item);

std::string format_controls_tsv(const std::string& label, double corrembed, double unweighted,
                                const std::vector<ControlScore>& controls);

/// Reorder annotations to follow `ids`; throws DataError if an id has no annotation.
std::vector<ItemAnnotation> align_annotations(const std::vector<ItemAnnotation>& annotations,
                                              const std::vector<std::string>& ids);

} // namespace corrembed

#endif // CORREMBED_REPORT_HPP
