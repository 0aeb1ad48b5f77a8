#ifndef CORREMBED_RETRIEVAL_HPP
#define CORREMBED_RETRIEVAL_HPP

#include "corrembed/types.hpp"

#include <string>
#include <vector>

namespace corrembed {

struct Neighbor {
    std::string item_id;
    double similarity = 0.0;
};

struct NeighborList {
    std::string query_id;
    /// Descending similarity, ties by ascending item_id; never contains the query.
    std::vector<Neighbor> neighbors;
};

/// Exact brute-force top-k by cosine similarity; k is clamped to n - 1.
NeighborList top_k(const EmbeddingSet& set, const std::string& query_id, std::size_t k);

} // namespace corrembed

#endif // CORREMBED_RETRIEVAL_HPP
