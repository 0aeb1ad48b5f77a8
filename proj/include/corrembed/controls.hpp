#ifndef CORREMBED_CONTROLS_HPP
#define CORREMBED_CONTROLS_HPP

#include "corrembed/simcore.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <string_view>
#include <vector>

namespace corrembed {

enum class ControlKind { random_embeddings, random_tags, shuffle_embeddings, shuffle_tags };

std::string_view to_string(ControlKind kind);

struct ControlSpec {
    ControlKind kind;
    std::uint64_t seed = 0;
};

/// Same shape and ids as `like`; entries i.i.d. uniform on [0, 1).
EmbeddingSet random_embeddings(const EmbeddingSet& like, std::uint64_t seed);

/// Same shape and ids as `like`; entries 1 with probability `density`. All-zero rows are redrawn.
TagSet random_tags(const TagSet& like, double density, std::uint64_t seed);

/// Fraction of nonzero entries in the set.
double nonzero_density(const LabeledRows& set);

/// Rows permuted uniformly at random while item_ids stay in place.
template <typename Set>
Set shuffle_assignment(const Set& set, std::uint64_t seed)
{
    if (set.rows() < 2) {
        throw DataError("shuffle_assignment: at least two rows required");
    }
    std::vector<Index> order(static_cast<std::size_t>(set.rows()));
    std::iota(order.begin(), order.end(), Index{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    Set out = set;
    for (Index r = 0; r < set.rows(); ++r) {
        out.values.row(r) = set.values.row(order[static_cast<std::size_t>(r)]);
    }
    return out;
}

struct ControlScore {
    ControlKind kind;
    std::vector<double> scores; ///< one per seed
    double mean = 0.0;
    double max_deviation = 0.0; ///< max |score - mean|
};

/**
 * Score one control over consecutive seeds base_seed, base_seed + 1, ...
 *
 * random_tags uses the mean density of `tags` unless `density` is given.
 */
ControlScore run_control(ControlKind kind, const EmbeddingSet& images, const TagSet& tags, std::uint64_t base_seed,
                         std::size_t seeds, const CorrEmbedOptions& options, std::optional<double> density = {});

/// All four controls, in ControlKind order.
std::vector<ControlScore> run_controls(const EmbeddingSet& images, const TagSet& tags, std::uint64_t base_seed,
                                       std::size_t seeds, const CorrEmbedOptions& options);

} // namespace corrembed

#endif // CORREMBED_CONTROLS_HPP
