#include "corrembed/retrieval.hpp"

#include "corrembed/simcore.hpp"

#include <algorithm>
#include <numeric>

namespace corrembed {

NeighborList top_k(const EmbeddingSet& set, const std::string& query_id, std::size_t k)
{
    if (k == 0) {
        throw DataError("k must be at least 1");
    }
    set.validate();
    const Index query = set.find(query_id);
    if (query < 0) {
        throw DataError("unknown query item '" + query_id + "'");
    }

    const Vector sims = CosineProfiles(set, "embedding").profile(query, true);
    std::vector<Index> candidates;
    candidates.reserve(static_cast<std::size_t>(set.rows()) - 1);
    for (Index j = 0; j < set.rows(); ++j) {
        if (j != query) {
            candidates.push_back(j);
        }
    }

    const auto before = [&](Index a, Index b) {
        if (sims[a] != sims[b]) {
            return sims[a] > sims[b];
        }
        return set.item_ids[static_cast<std::size_t>(a)] < set.item_ids[static_cast<std::size_t>(b)];
    };
    const std::size_t keep = std::min(k, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                      before);

    NeighborList out{query_id, {}};
    out.neighbors.reserve(keep);
    for (std::size_t r = 0; r < keep; ++r) {
        out.neighbors.push_back({set.item_ids[static_cast<std::size_t>(candidates[r])], sims[candidates[r]]});
    }
    return out;
}

} // namespace corrembed
