// corrembed: score image embeddings against tag-annotated similarity.

#include "corrembed/controls.hpp"
#include "corrembed/ingest.hpp"
#include "corrembed/report.hpp"
#include "corrembed/retrieval.hpp"
#include "corrembed/synthgen.hpp"
#include "corrembed/tagspace.hpp"
#include "corrembed/weighting.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

using namespace corrembed;
namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
    std::uint64_t seed = 0;
    unsigned threads = 0;
    bool include_self = false;
    std::size_t sample = 0;

    CorrEmbedOptions corr() const
    {
        CorrEmbedOptions options;
        options.seed = seed;
        options.threads = threads;
        options.include_self = include_self;
        if (sample > 0) {
            options.sample = sample;
        }
        return options;
    }
};

struct EmbeddingInput {
    std::string embeddings;
    std::string ids;
    bool csv = false;

    void add_to(CLI::App* cmd)
    {
        cmd->add_option("--embeddings", embeddings, "CORREMB1 file (or CSV with --csv)")->required();
        cmd->add_option("--ids", ids, "item ids, one per line, matching embedding rows");
        cmd->add_flag("--csv", csv, "read embeddings as CSV rows: item_id,v1,...,vd");
    }

    EmbeddingSet load() const
    {
        if (csv) {
            return read_embeddings_csv(embeddings);
        }
        if (ids.empty()) {
            throw DataError("--ids is required unless --csv is given");
        }
        return read_embeddings(embeddings, ids);
    }
};

struct TagInput {
    std::string tags;
    std::string histories;
    std::string weights;
    bool unweighted = false;
    bool theoretical_max = false;
    double floor = 0.0;
    std::vector<std::string> dropped{default_dropped_categories().begin(), default_dropped_categories().end()};

    void add_to(CLI::App* cmd, bool weights_required)
    {
        cmd->add_option("--tags", tags, "annotations JSONL")->required();
        cmd->add_option("--histories", histories, "rental histories JSONL (computes category weights)");
        if (weights_required) {
            cmd->add_option("--weights", weights, "precomputed category weights JSON");
            cmd->add_flag("--unweighted", unweighted, "score plain indicator vectors only");
        }
        cmd->add_option("--drop", dropped, "categories left out of the tag space")->capture_default_str();
        cmd->add_flag("--theoretical-max", theoretical_max, "normalize entropy by log|X| per category");
        cmd->add_option("--weight-floor", floor, "lower bound on every category weight")->capture_default_str();
    }

    std::set<std::string> dropped_set() const { return {dropped.begin(), dropped.end()}; }

    WeightOptions weight_options(const TagVocabulary& vocab) const
    {
        WeightOptions options;
        options.floor = floor;
        if (theoretical_max) {
            std::unordered_map<std::string, std::size_t> sizes;
            for (const auto& category : vocab.categories()) {
                sizes[category] = vocab.category_size(category);
            }
            options.category_sizes = std::move(sizes);
        }
        return options;
    }

    std::pair<CategoryWeights, std::vector<CategoryEntropy>> compute(const std::vector<ItemAnnotation>& items,
                                                                     const TagVocabulary& vocab) const
    {
        const auto found = read_histories(histories);
        const auto entropies = category_entropies(found, index_annotations(items), vocab);
        return {tag_weights(entropies, weight_options(vocab)), entropies};
    }

    std::optional<CategoryWeights> resolve(const std::vector<ItemAnnotation>& items, const TagVocabulary& vocab) const
    {
        if (unweighted) {
            return std::nullopt;
        }
        if (!weights.empty()) {
            return read_weights(weights);
        }
        if (!histories.empty()) {
            auto computed = compute(items, vocab).first;
            for (const auto& category : computed.no_signal) {
                std::cerr << "warning: no rental signal for category '" << category << "', weight set to 1\n";
            }
            return computed;
        }
        throw DataError("category weights unavailable: pass --histories, --weights or --unweighted");
    }
};

void emit(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
    } else {
        write_atomically(path, text);
    }
}

int run(int argc, char** argv)
{
    CLI::App app{"Embedding-versus-tag similarity scoring"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions global;
    app.add_option("--seed", global.seed, "seed for sampling, controls and synthesis")->capture_default_str();
    app.add_option("--threads", global.threads, "worker threads (0 = all cores)")->capture_default_str();
    app.add_flag("--include-self", global.include_self, "keep the j = i pair in similarity profiles");
    app.add_option("--sample", global.sample, "score k sampled query items (0 = all)")->capture_default_str();

    // score -----------------------------------------------------------------
    auto* score = app.add_subcommand("score", "score embeddings with and without category weights, plus controls");
    EmbeddingInput score_emb;
    TagInput score_tags;
    std::string score_label = "embeddings";
    std::string score_tsv;
    std::string score_json;
    bool per_item = false;
    bool skip_untagged = false;
    std::size_t control_seeds = 3;
    score_emb.add_to(score);
    score_tags.add_to(score, true);
    score->add_option("--label", score_label, "configuration name for the report")->capture_default_str();
    score->add_option("--out-tsv", score_tsv, "TSV report path (default stdout)");
    score->add_option("--out-json", score_json, "JSON report path");
    score->add_flag("--per-item", per_item, "include per-item correlations in the JSON report");
    score->add_flag("--skip-untagged", skip_untagged, "drop items whose tag or embedding vector is zero");
    score->add_option("--control-seeds", control_seeds, "seeds per control")->capture_default_str();

    // weights ---------------------------------------------------------------
    auto* weights = app.add_subcommand("weights", "compute category weights from rental histories");
    TagInput weight_tags;
    std::string weights_out;
    std::string entropies_out;
    weight_tags.add_to(weights, false);
    weights->get_option("--histories")->required();
    weights->add_option("--out", weights_out, "weights JSON path (default stdout)");
    weights->add_option("--entropies", entropies_out, "also write per-category entropies as TSV");

    // controls --------------------------------------------------------------
    auto* controls = app.add_subcommand("controls", "score the four control baselines");
    EmbeddingInput control_emb;
    TagInput control_tags;
    std::string control_label = "embeddings";
    std::string control_out;
    std::size_t controls_seeds = 3;
    control_emb.add_to(controls);
    control_tags.add_to(controls, true);
    controls->add_option("--label", control_label)->capture_default_str();
    controls->add_option("--control-seeds", controls_seeds, "seeds per control")->capture_default_str();
    controls->add_option("--out", control_out, "TSV path (default stdout)");

    // neighbors -------------------------------------------------------------
    auto* neighbors = app.add_subcommand("neighbors", "exact top-k most similar items");
    EmbeddingInput neighbor_emb;
    std::string query;
    std::size_t k = 10;
    std::string neighbors_out;
    neighbor_emb.add_to(neighbors);
    neighbors->add_option("--query", query, "query item id")->required();
    neighbors->add_option("--k", k, "neighbors to return")->capture_default_str();
    neighbors->add_option("--out", neighbors_out, "TSV path (default stdout)");

    // synth -----------------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "write a synthetic aligned dataset");
    SynthSpec spec;
    std::string synth_dir;
    std::string model = "linear";
    std::string salience = "uniform";
    std::string dtype = "f32";
    synth->add_option("--out-dir", synth_dir, "output directory")->required();
    synth->add_option("--n", spec.n)->capture_default_str();
    synth->add_option("--tag-count", spec.tags, "tags across all categories")->capture_default_str();
    synth->add_option("--categories", spec.categories)->capture_default_str();
    synth->add_option("--dim", spec.dim)->capture_default_str();
    synth->add_option("--noise", spec.noise, "standard deviation of embedding noise")->capture_default_str();
    synth->add_option("--customers", spec.customers)->capture_default_str();
    synth->add_option("--rentals", spec.rentals_per_customer, "rentals per customer")->capture_default_str();
    synth->add_option("--model", model)->check(CLI::IsMember({"linear", "identity"}))->capture_default_str();
    synth->add_option("--salience", salience)->check(CLI::IsMember({"uniform", "entropy"}))->capture_default_str();
    synth->add_option("--dtype", dtype)->check(CLI::IsMember({"f32", "f64"}))->capture_default_str();

    // meta-corr -------------------------------------------------------------
    auto* meta = app.add_subcommand("meta-corr", "correlate columns of published result tables");
    std::string table2 = CORREMBED_DEFAULT_FIXTURES "/table2.tsv";
    std::string table3;
    std::string x_col = "acc1";
    std::string y_col = "corrembed";
    bool paired = false;
    bool include_controls = false;
    std::vector<std::string> exclude;
    meta->add_option("--table2", table2, "output-layer results TSV")->capture_default_str();
    meta->add_option("--table3", table3, "penultimate-layer results TSV (adds column 'penultimate')");
    meta->add_option("--x", x_col, "x column")->capture_default_str();
    meta->add_option("--y", y_col, "y column")->capture_default_str();
    meta->add_flag("--paired", paired, "only models with a penultimate score (needs --table3)");
    meta->add_flag("--include", include_controls, "report with control rows as the primary value");
    meta->add_option("--exclude", exclude, "model names to leave out");

    // export-2d -------------------------------------------------------------
    auto* export2d = app.add_subcommand("export-2d", "write embeddings as TSV for external projection tools");
    EmbeddingInput export_emb;
    std::string export_out;
    std::string export_tags;
    std::string color_by;
    export_emb.add_to(export2d);
    export2d->add_option("--out", export_out, "TSV path (default stdout)");
    export2d->add_option("--tags", export_tags, "annotations JSONL for a label column");
    export2d->add_option("--color-by", color_by, "category whose tag becomes the label column");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (score->parsed()) {
        const auto images = score_emb.load();
        const auto items = read_annotations(score_tags.tags);
        const auto vocab = build_vocabulary(items, score_tags.dropped_set());
        const auto resolved = score_tags.resolve(items, vocab);
        ScoreConfig config;
        config.label = score_label;
        config.corr = global.corr();
        config.corr.zero_rows = skip_untagged ? ZeroRowPolicy::drop : ZeroRowPolicy::error;
        config.control_seed = global.seed;
        config.control_seeds = control_seeds;
        const auto report = score_dataset(images, items, vocab, resolved ? &*resolved : nullptr, config);
        if (!score_json.empty()) {
            write_atomically(score_json, format_score_json(report, per_item));
        }
        emit(score_tsv, format_score_tsv(report));
        std::cerr << "scored " << report.n_scored << " items, skipped " << report.n_skipped << ", "
                  << report.wall_seconds << " s\n";
    } else if (weights->parsed()) {
        const auto items = read_annotations(weight_tags.tags);
        const auto vocab = build_vocabulary(items, weight_tags.dropped_set());
        const auto [computed, entropies] = weight_tags.compute(items, vocab);
        for (const auto& category : computed.no_signal) {
            std::cerr << "warning: no rental signal for category '" << category << "', weight set to 1\n";
        }
        if (!entropies_out.empty()) {
            std::string text = "category\tentropy\tcustomers\tweight\n";
            for (const auto& e : entropies) {
                text += e.category + '\t' + format_double(e.value) + '\t' + std::to_string(e.customers_counted) +
                        '\t' + format_double(computed.at(e.category)) + '\n';
            }
            write_atomically(entropies_out, text);
        }
        emit(weights_out, format_weights(computed));
    } else if (controls->parsed()) {
        const auto images = control_emb.load();
        const auto items = align_annotations(read_annotations(control_tags.tags), images.item_ids);
        const auto vocab = build_vocabulary(items, control_tags.dropped_set());
        const auto resolved = control_tags.resolve(items, vocab);
        const auto unweighted_set = encode_all(items, vocab);
        const auto weighted_set = resolved ? encode_all(items, vocab, &*resolved) : unweighted_set;
        const auto options = global.corr();
        const double real = corr_embed(images, weighted_set, options).mean;
        const double plain = corr_embed(images, unweighted_set, options).mean;
        const auto scores = run_controls(images, weighted_set, global.seed, controls_seeds, options);
        emit(control_out, format_controls_tsv(control_label, real, plain, scores));
    } else if (neighbors->parsed()) {
        const auto images = neighbor_emb.load();
        const auto list = top_k(images, query, k);
        std::string text = "rank\titem_id\tsimilarity\n";
        for (std::size_t r = 0; r < list.neighbors.size(); ++r) {
            text += std::to_string(r + 1) + '\t' + list.neighbors[r].item_id + '\t' +
                    format_double(list.neighbors[r].similarity) + '\n';
        }
        emit(neighbors_out, text);
    } else if (synth->parsed()) {
        spec.seed = global.seed;
        spec.model = model == "identity" ? EmbeddingModel::identity : EmbeddingModel::linear;
        spec.salience = salience == "entropy" ? Salience::entropy_weights : Salience::uniform;
        const auto data = generate(spec);
        const fs::path dir(synth_dir);
        fs::create_directories(dir);
        write_embeddings(dir / "embeddings.corremb", data.embeddings.values,
                         dtype == "f32" ? Dtype::float32 : Dtype::float64);
        write_ids(dir / "ids.txt", data.embeddings.item_ids);
        write_annotations(dir / "annotations.jsonl", data.annotations);
        write_histories(dir / "histories.jsonl", data.histories);
        write_atomically(dir / "weights.json", format_weights(data.weights));
        std::cerr << "wrote " << data.embeddings.rows() << " items to " << dir.string() << '\n';
    } else if (meta->parsed()) {
        auto table = to_meta_table(read_output_fixture(table2));
        if (!table3.empty()) {
            table = join_penultimate(std::move(table), read_penultimate_fixture(table3));
        }
        MetaCorrOptions options;
        options.exclude = {exclude.begin(), exclude.end()};
        if (paired) {
            if (table3.empty()) {
                throw DataError("--paired needs --table3");
            }
            options.require_columns = {"penultimate"};
        }
        auto included = options;
        included.include_controls = true;
        const auto without = meta_corr(table, x_col, y_col, options);
        const auto with = meta_corr(table, x_col, y_col, included);
        std::string text = "rows\tx\ty\tn\tr\n";
        const auto line = [&](const char* rows, const MetaCorrResult& r) {
            return std::string(rows) + '\t' + x_col + '\t' + y_col + '\t' + std::to_string(r.models.size()) + '\t' +
                   format_double(r.r) + '\n';
        };
        if (include_controls) {
            text += line("with_controls", with) + line("without_controls", without);
        } else {
            text += line("without_controls", without) + line("with_controls", with);
        }
        std::cout << text;
    } else if (export2d->parsed()) {
        const auto images = export_emb.load();
        std::vector<std::string> labels;
        if (!color_by.empty()) {
            if (export_tags.empty()) {
                throw DataError("--color-by needs --tags");
            }
            for (const auto& item : align_annotations(read_annotations(export_tags), images.item_ids)) {
                std::string label = "Other";
                for (const auto& tag : item.tags) {
                    if (tag.category == color_by) {
                        label = tag.name;
                        break;
                    }
                }
                labels.push_back(label);
            }
        }
        std::string text = "item_id";
        if (!labels.empty()) {
            text += "\tlabel";
        }
        for (Index c = 0; c < images.cols(); ++c) {
            text += "\tv" + std::to_string(c);
        }
        text += '\n';
        for (Index r = 0; r < images.rows(); ++r) {
            text += images.item_ids[static_cast<std::size_t>(r)];
            if (!labels.empty()) {
                text += '\t' + labels[static_cast<std::size_t>(r)];
            }
            for (Index c = 0; c < images.cols(); ++c) {
                text += '\t' + format_double(images.values(r, c));
            }
            text += '\n';
        }
        emit(export_out, text);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    try {
        return run(argc, argv);
    } catch (const DegenerateError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
