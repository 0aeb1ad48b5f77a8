#include "corrembed/report.hpp"

#include <json.hpp>

#include <chrono>
#include <unordered_map>

namespace corrembed {

MetaTable to_meta_table(const std::vector<FixtureRow>& rows)
{
    MetaTable table;
    for (const char* name : {"acc1", "acc5", "corrembed", "unweighted", "random", "shuffled"}) {
        table.columns[name];
    }
    for (const auto& row : rows) {
        table.models.push_back(row.model);
        table.columns["acc1"].push_back(row.acc1);
        table.columns["acc5"].push_back(row.acc5);
        table.columns["corrembed"].push_back(row.corrembed);
        table.columns["unweighted"].push_back(row.unweighted);
        table.columns["random"].push_back(row.random);
        table.columns["shuffled"].push_back(row.shuffled);
    }
    return table;
}

MetaTable join_penultimate(MetaTable table, const std::vector<PenultimateRow>& rows)
{
    std::unordered_map<std::string, std::optional<double>> by_model;
    for (const auto& row : rows) {
        by_model[row.model] = row.corrembed;
    }
    auto& column = table.columns["penultimate"];
    column.clear();
    for (const auto& model : table.models) {
        const auto it = by_model.find(model);
        column.push_back(it == by_model.end() ? std::nullopt : it->second);
    }
    return table;
}

MetaCorrResult meta_corr(const MetaTable& table, const std::string& x_col, const std::string& y_col,
                         const MetaCorrOptions& options)
{
    const auto column = [&](const std::string& name) -> const std::vector<std::optional<double>>& {
        const auto it = table.columns.find(name);
        if (it == table.columns.end()) {
            throw DataError("unknown column '" + name + "'");
        }
        return it->second;
    };
    const auto& xs = column(x_col);
    const auto& ys = column(y_col);
    std::vector<const std::vector<std::optional<double>>*> required;
    for (const auto& name : options.require_columns) {
        required.push_back(&column(name));
    }
    const auto& acc1 = table.columns.contains("acc1") ? column("acc1") : xs;
    const auto& acc5 = table.columns.contains("acc5") ? column("acc5") : xs;

    MetaCorrResult result;
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t r = 0; r < table.size(); ++r) {
        if (options.exclude.contains(table.models[r]) || !xs[r] || !ys[r]) {
            continue;
        }
        const bool control = acc1[r] && acc5[r] && *acc1[r] == 0.0 && *acc5[r] == 0.0;
        if (control && !options.include_controls) {
            continue;
        }
        bool complete = true;
        for (const auto* req : required) {
            complete = complete && (*req)[r].has_value();
        }
        if (!complete) {
            continue;
        }
        x.push_back(*xs[r]);
        y.push_back(*ys[r]);
        result.models.push_back(table.models[r]);
    }
    if (x.size() < 3) {
        throw DataError("meta-correlation needs at least 3 rows, have " + std::to_string(x.size()));
    }
    const auto r = pearson(Eigen::Map<const Vector>(x.data(), static_cast<Index>(x.size())),
                           Eigen::Map<const Vector>(y.data(), static_cast<Index>(y.size())));
    if (!r) {
        throw DegenerateError("meta-correlation undefined: a column is constant");
    }
    result.r = *r;
    return result;
}

std::vector<ItemAnnotation> align_annotations(const std::vector<ItemAnnotation>& annotations,
                                              const std::vector<std::string>& ids)
{
    std::unordered_map<std::string, const ItemAnnotation*> by_id;
    for (const auto& annotation : annotations) {
        by_id.emplace(annotation.item_id, &annotation);
    }
    std::vector<ItemAnnotation> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) {
            throw DataError("embedding item '" + id + "' has no annotation");
        }
        out.push_back(*it->second);
    }
    return out;
}

ScoreReport score_dataset(const EmbeddingSet& images, const std::vector<ItemAnnotation>& annotations,
                          const TagVocabulary& vocab, const CategoryWeights* weights, const ScoreConfig& config)
{
    if (config.control_seeds == 0) {
        throw DataError("at least one control seed required");
    }
    const auto started = std::chrono::steady_clock::now();
    const auto aligned = align_annotations(annotations, images.item_ids);
    const TagSet unweighted = encode_all(aligned, vocab);
    const TagSet weighted = weights ? encode_all(aligned, vocab, weights) : unweighted;
    const double density = nonzero_density(unweighted);
    const auto& options = config.corr;

    ScoreReport report;
    report.label = config.label;

    // Tag controls use their own seed stream. Sharing seeds with the shuffled-embedding
    // row would apply the same permutation to both sides and restore the pairing.
    constexpr std::uint64_t tag_stream = 0x9e3779b97f4a7c15ULL;
    const auto seeded_mean = [&](auto&& score_for_seed) {
        double sum = 0.0;
        for (std::size_t s = 0; s < config.control_seeds; ++s) {
            sum += score_for_seed((config.control_seed + s) ^ tag_stream);
        }
        return sum / static_cast<double>(config.control_seeds);
    };
    const auto tag_columns = [&](const EmbeddingSet& embeddings, ScoreRow& row) {
        row.corrembed = corr_embed(embeddings, weighted, options).mean;
        row.unweighted = corr_embed(embeddings, unweighted, options).mean;
        row.random = seeded_mean(
            [&](std::uint64_t seed) { return corr_embed(embeddings, random_tags(unweighted, density, seed), options).mean; });
        row.shuffled = seeded_mean(
            [&](std::uint64_t seed) { return corr_embed(embeddings, shuffle_assignment(weighted, seed), options).mean; });
    };

    report.weighted = corr_embed(images, weighted, options);
    report.n_scored = report.weighted.n_scored;
    report.n_skipped = report.weighted.n_skipped;

    ScoreRow real{config.label};
    tag_columns(images, real);
    report.rows.push_back(real);

    if (!config.skip_control_rows) {
        for (const auto kind : {ControlKind::random_embeddings, ControlKind::shuffle_embeddings}) {
            ScoreRow averaged{kind == ControlKind::random_embeddings ? "random" : "random shuffle"};
            for (std::size_t s = 0; s < config.control_seeds; ++s) {
                const std::uint64_t seed = config.control_seed + s;
                const EmbeddingSet control = kind == ControlKind::random_embeddings ? random_embeddings(images, seed)
                                                                                   : shuffle_assignment(images, seed);
                ScoreRow row;
                tag_columns(control, row);
                averaged.corrembed += row.corrembed;
                averaged.unweighted += row.unweighted;
                averaged.random += row.random;
                averaged.shuffled += row.shuffled;
            }
            const double k = static_cast<double>(config.control_seeds);
            averaged.corrembed /= k;
            averaged.unweighted /= k;
            averaged.random /= k;
            averaged.shuffled /= k;
            report.rows.push_back(averaged);
        }
    }

    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

std::string format_score_tsv(const ScoreReport& report)
{
    std::string text = "configuration\tcorrembed\tunweighted\trandom\tshuffled\tn_scored\tn_skipped\n";
    for (const auto& row : report.rows) {
        text += row.configuration + '\t' + format_double(row.corrembed) + '\t' + format_double(row.unweighted) + '\t' +
                format_double(row.random) + '\t' + format_double(row.shuffled) + '\t' +
                std::to_string(report.n_scored) + '\t' + std::to_string(report.n_skipped) + '\n';
    }
    return text;
}

std::string format_score_json(const ScoreReport& report, bool per_item)
{
    using nlohmann::json;
    json rows = json::array();
    for (const auto& row : report.rows) {
        rows.push_back({{"configuration", row.configuration},
                        {"corrembed", row.corrembed},
                        {"unweighted", row.unweighted},
                        {"random", row.random},
                        {"shuffled", row.shuffled}});
    }
    json out = {{"label", report.label},
                {"mean", report.weighted.mean},
                {"n_scored", report.n_scored},
                {"n_skipped", report.n_skipped},
                {"dropped", report.weighted.dropped},
                {"wall_seconds", report.wall_seconds},
                {"rows", std::move(rows)}};
    if (per_item) {
        json items = json::object();
        for (const auto& item : report.weighted.per_item) {
            items[item.item_id] = item.correlation ? json(*item.correlation) : json(nullptr);
        }
        out["per_item"] = std::move(items);
    }
    return out.dump(2) + "\n";
}

std::string format_controls_tsv(const std::string& label, double corrembed, double unweighted,
                                const std::vector<ControlScore>& controls)
{
    std::string header = "label\tcorrembed\tunweighted";
    std::string row = label + '\t' + format_double(corrembed) + '\t' + format_double(unweighted);
    for (const auto& control : controls) {
        const std::string name(to_string(control.kind));
        header += '\t' + name + '\t' + name + "_maxdev";
        row += '\t' + format_double(control.mean) + '\t' + format_double(control.max_deviation);
    }
    return header + '\n' + row + '\n';
}

} // namespace corrembed
