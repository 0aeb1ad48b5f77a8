#ifndef CORREMBED_WEIGHTING_HPP
#define CORREMBED_WEIGHTING_HPP

#include "corrembed/tagspace.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace corrembed {

struct RentalHistory {
    std::string customer_id;
    std::vector<std::string> item_ids;
};

struct CategoryEntropy {
    std::string category;
    double value = 0.0;
    /// Customers with at least one tag occurrence in the category.
    std::size_t customers_counted = 0;

    bool has_signal() const { return customers_counted > 0; }
};

using AnnotationIndex = std::unordered_map<std::string, const ItemAnnotation*>;

/// Lookup by item_id. The returned index borrows from `annotations`.
AnnotationIndex index_annotations(std::span<const ItemAnnotation> annotations);

struct EntropyOptions {
    double log_base = std::numbers::e;
    /// Ignore rented items missing from the annotation index instead of throwing.
    bool skip_unknown_items = false;
};

/**
 * Mean per-customer Shannon entropy of the tag distribution within `category`.
 *
 * For each customer, every rented item contributes one count per tag it
 * carries in the category. Only customers with a nonzero category total are
 * averaged. When no customer has any occurrence the result has
 * customers_counted == 0 and value 0.
 */
CategoryEntropy category_entropy(std::span<const RentalHistory> histories, const AnnotationIndex& annotations,
                                 const std::string& category, const EntropyOptions& options = {});

/// Entropy for every category of `vocab`, in vocabulary order.
std::vector<CategoryEntropy> category_entropies(std::span<const RentalHistory> histories,
                                                const AnnotationIndex& annotations, const TagVocabulary& vocab,
                                                const EntropyOptions& options = {});

struct WeightOptions {
    /// Lower bound applied after inversion; 0 keeps the max-entropy category at 0.
    double floor = 0.0;
    /// When set, normalize each category by log(|X|) instead of the observed min/max.
    std::optional<std::unordered_map<std::string, std::size_t>> category_sizes;
    /// Base the entropies were computed in (only used with category_sizes).
    double log_base = std::numbers::e;
};

/**
 * Min-max normalize entropies and invert: w = 1 - (H - min H) / (max H - min H).
 *
 * Categories without signal get 1.0 and are listed in `no_signal`; they do
 * not take part in the min/max. If every signalled entropy is equal, all
 * weights are 1.0.
 */
CategoryWeights tag_weights(std::span<const CategoryEntropy> entropies, const WeightOptions& options = {});

} // namespace corrembed

#endif // CORREMBED_WEIGHTING_HPP
