#include "corrembed/controls.hpp"

#include <cmath>

namespace corrembed {

std::string_view to_string(ControlKind kind)
{
    switch (kind) {
    case ControlKind::random_embeddings:
        return "random_embeddings";
    case ControlKind::random_tags:
        return "random_tags";
    case ControlKind::shuffle_embeddings:
        return "shuffle_embeddings";
    case ControlKind::shuffle_tags:
        return "shuffle_tags";
    }
    return "unknown";
}

EmbeddingSet random_embeddings(const EmbeddingSet& like, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    EmbeddingSet out{like.item_ids, Matrix(like.rows(), like.cols())};
    for (Index r = 0; r < out.rows(); ++r) {
        for (Index c = 0; c < out.cols(); ++c) {
            out.values(r, c) = uniform(rng);
        }
    }
    return out;
}

TagSet random_tags(const TagSet& like, double density, std::uint64_t seed)
{
    if (!(density > 0.0 && density < 1.0)) {
        throw DataError("random tag density must lie in (0, 1)");
    }
    if (like.cols() == 0) {
        throw DataError("random_tags: tag space has no dimensions");
    }
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution bit(density);
    TagSet out{like.item_ids, Matrix(like.rows(), like.cols())};
    for (Index r = 0; r < out.rows(); ++r) {
        do {
            for (Index c = 0; c < out.cols(); ++c) {
                out.values(r, c) = bit(rng) ? 1.0 : 0.0;
            }
        } while ((out.values.row(r).array() == 0.0).all());
    }
    return out;
}

double nonzero_density(const LabeledRows& set)
{
    if (set.values.size() == 0) {
        return 0.0;
    }
    const auto nonzero = (set.values.array() != 0.0).count();
    return static_cast<double>(nonzero) / static_cast<double>(set.values.size());
}

ControlScore run_control(ControlKind kind, const EmbeddingSet& images, const TagSet& tags, std::uint64_t base_seed,
                         std::size_t seeds, const CorrEmbedOptions& options, std::optional<double> density)
{
    if (seeds == 0) {
        throw DataError("at least one control seed required");
    }
    const double tag_density = density.value_or(nonzero_density(tags));

    ControlScore out{kind, {}, 0.0, 0.0};
    for (std::size_t s = 0; s < seeds; ++s) {
        const std::uint64_t seed = base_seed + s;
        double score = 0.0;
        switch (kind) {
        case ControlKind::random_embeddings:
            score = corr_embed(random_embeddings(images, seed), tags, options).mean;
            break;
        case ControlKind::random_tags:
            score = corr_embed(images, random_tags(tags, tag_density, seed), options).mean;
            break;
        case ControlKind::shuffle_embeddings:
            score = corr_embed(shuffle_assignment(images, seed), tags, options).mean;
            break;
        case ControlKind::shuffle_tags:
            score = corr_embed(images, shuffle_assignment(tags, seed), options).mean;
            break;
        }
        out.scores.push_back(score);
    }

    double sum = 0.0;
    for (double score : out.scores) {
        sum += score;
    }
    out.mean = sum / static_cast<double>(out.scores.size());
    for (double score : out.scores) {
        out.max_deviation = std::max(out.max_deviation, std::abs(score - out.mean));
    }
    return out;
}

std::vector<ControlScore> run_controls(const EmbeddingSet& images, const TagSet& tags, std::uint64_t base_seed,
                                       std::size_t seeds, const CorrEmbedOptions& options)
{
    std::vector<ControlScore> out;
    for (auto kind : {ControlKind::random_embeddings, ControlKind::random_tags, ControlKind::shuffle_embeddings,
                      ControlKind::shuffle_tags}) {
        out.push_back(run_control(kind, images, tags, base_seed, seeds, options));
    }
    return out;
}

} // namespace corrembed
