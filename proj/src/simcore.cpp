#include "corrembed/simcore.hpp"

#include "corrembed/parallel.hpp"

#include <numeric>
#include <random>

namespace corrembed {

CosineProfiles::CosineProfiles(const LabeledRows& set, const std::string& context)
    : rows_(set.values), norms_(set.values.rowwise().norm())
{
    for (Index r = 0; r < norms_.size(); ++r) {
        if (norms_[r] == 0.0) {
            const auto id = static_cast<std::size_t>(r) < set.item_ids.size() ? set.item_ids[static_cast<std::size_t>(r)]
                                                                              : std::to_string(r);
            throw ZeroNormError(Operand::left, id, context);
        }
    }
}

Vector CosineProfiles::profile(Index i, bool include_self) const
{
    if (i < 0 || i >= rows_.rows()) {
        throw DataError("profile index " + std::to_string(i) + " out of range");
    }
    const Vector dots = rows_ * rows_.row(i).transpose();
    const Index n = rows_.rows();
    Vector out(include_self ? n : n - 1);
    Index k = 0;
    for (Index j = 0; j < n; ++j) {
        if (j == i && !include_self) {
            continue;
        }
        out[k++] = clamp_unit(dots[j] / (norms_[i] * norms_[j]));
    }
    return out;
}

Vector similarity_profile(const LabeledRows& set, Index i, bool include_self)
{
    return CosineProfiles(set).profile(i, include_self);
}

void require_aligned(const LabeledRows& a, const LabeledRows& b)
{
    const std::size_t common = std::min(a.item_ids.size(), b.item_ids.size());
    for (std::size_t r = 0; r < common; ++r) {
        if (a.item_ids[r] != b.item_ids[r]) {
            throw DataError("item ids misaligned at row " + std::to_string(r) + ": '" + a.item_ids[r] + "' vs '" +
                            b.item_ids[r] + "'");
        }
    }
    if (a.item_ids.size() != b.item_ids.size()) {
        throw DataError("item ids misaligned: " + std::to_string(a.item_ids.size()) + " vs " +
                        std::to_string(b.item_ids.size()) + " items");
    }
}

namespace {

template <typename Set>
Set keep_rows(const Set& set, const std::vector<Index>& rows)
{
    Set out;
    out.values.resize(static_cast<Index>(rows.size()), set.cols());
    out.item_ids.reserve(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        out.values.row(static_cast<Index>(k)) = set.values.row(rows[k]);
        out.item_ids.push_back(set.item_ids[static_cast<std::size_t>(rows[k])]);
    }
    return out;
}

std::vector<Index> sample_queries(Index n, const CorrEmbedOptions& options)
{
    std::vector<Index> queries(static_cast<std::size_t>(n));
    std::iota(queries.begin(), queries.end(), Index{0});
    if (!options.sample || *options.sample >= queries.size()) {
        return queries;
    }
    if (*options.sample == 0) {
        throw DataError("sample size must be at least 1");
    }
    std::mt19937_64 rng(options.seed);
    std::shuffle(queries.begin(), queries.end(), rng);
    queries.resize(*options.sample);
    std::sort(queries.begin(), queries.end());
    return queries;
}

CorrEmbedResult score_aligned(const EmbeddingSet& images, const TagSet& tags, const CorrEmbedOptions& options)
{
    const CosineProfiles image_profiles(images, "embedding");
    const CosineProfiles tag_profiles(tags, "tag");
    const auto queries = sample_queries(images.rows(), options);

    std::vector<std::optional<double>> correlations(queries.size());
    parallel_for(queries.size(), options.threads, [&](std::size_t q) {
        const Index i = queries[q];
        const Vector x = tag_profiles.profile(i, options.include_self);
        const Vector y = image_profiles.profile(i, options.include_self);
        correlations[q] = pearson(x, y);
    });

    CorrEmbedResult result;
    result.per_item.reserve(queries.size());
    double sum = 0.0;
    for (std::size_t q = 0; q < queries.size(); ++q) {
        result.per_item.push_back({images.item_ids[static_cast<std::size_t>(queries[q])], correlations[q]});
        if (correlations[q]) {
            sum += *correlations[q];
            ++result.n_scored;
        } else {
            ++result.n_skipped;
        }
    }
    if (result.n_scored == 0) {
        throw DegenerateError("degenerate tag space: no item has a defined correlation");
    }
    result.mean = sum / static_cast<double>(result.n_scored);
    return result;
}

} // namespace

CorrEmbedResult corr_embed(const EmbeddingSet& images, const TagSet& tags, const CorrEmbedOptions& options)
{
    require_aligned(images, tags);
    const Index min_rows = options.include_self ? 2 : 3;
    images.validate(min_rows);
    tags.validate(min_rows);

    if (options.zero_rows == ZeroRowPolicy::error) {
        return score_aligned(images, tags, options);
    }

    const Vector image_norms = images.values.rowwise().norm();
    const Vector tag_norms = tags.values.rowwise().norm();
    std::vector<Index> kept;
    std::vector<std::string> dropped;
    for (Index r = 0; r < images.rows(); ++r) {
        if (image_norms[r] == 0.0 || tag_norms[r] == 0.0) {
            dropped.push_back(images.item_ids[static_cast<std::size_t>(r)]);
        } else {
            kept.push_back(r);
        }
    }
    if (dropped.empty()) {
        return score_aligned(images, tags, options);
    }
    if (static_cast<Index>(kept.size()) < min_rows) {
        throw DegenerateError("only " + std::to_string(kept.size()) + " items left after dropping zero rows");
    }
    auto result = score_aligned(keep_rows(images, kept), keep_rows(tags, kept), options);
    result.dropped = std::move(dropped);
    return result;
}

} // namespace corrembed
