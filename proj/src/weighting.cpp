#include "corrembed/weighting.hpp"

#include <algorithm>
#include <map>

namespace corrembed {

AnnotationIndex index_annotations(std::span<const ItemAnnotation> annotations)
{
    AnnotationIndex index;
    index.reserve(annotations.size());
    for (const auto& annotation : annotations) {
        index.emplace(annotation.item_id, &annotation);
    }
    return index;
}

CategoryEntropy category_entropy(std::span<const RentalHistory> histories, const AnnotationIndex& annotations,
                                 const std::string& category, const EntropyOptions& options)
{
    if (!(options.log_base > 0.0) || options.log_base == 1.0) {
        throw DataError("entropy log base must be positive and != 1");
    }
    const double log_scale = std::log(options.log_base);

    CategoryEntropy result{category, 0.0, 0};
    double sum = 0.0;
    std::map<std::string, std::size_t> counts;
    for (const auto& history : histories) {
        counts.clear();
        std::size_t total = 0;
        for (const auto& item_id : history.item_ids) {
            const auto it = annotations.find(item_id);
            if (it == annotations.end()) {
                if (options.skip_unknown_items) {
                    continue;
                }
                throw DataError("customer '" + history.customer_id + "' rented unknown item '" + item_id + "'");
            }
            for (const auto& tag : it->second->tags) {
                if (tag.category == category) {
                    ++counts[tag.name];
                    ++total;
                }
            }
        }
        if (total == 0) {
            continue;
        }
        double entropy = 0.0;
        for (const auto& [name, count] : counts) {
            const double p = static_cast<double>(count) / static_cast<double>(total);
            entropy -= p * std::log(p);
        }
        sum += entropy / log_scale;
        ++result.customers_counted;
    }
    if (result.customers_counted > 0) {
        result.value = sum / static_cast<double>(result.customers_counted);
    }
    return result;
}

std::vector<CategoryEntropy> category_entropies(std::span<const RentalHistory> histories,
                                                const AnnotationIndex& annotations, const TagVocabulary& vocab,
                                                const EntropyOptions& options)
{
    std::vector<CategoryEntropy> out;
    out.reserve(vocab.categories().size());
    for (const auto& category : vocab.categories()) {
        out.push_back(category_entropy(histories, annotations, category, options));
    }
    return out;
}

CategoryWeights tag_weights(std::span<const CategoryEntropy> entropies, const WeightOptions& options)
{
    if (entropies.empty()) {
        throw DataError("no category entropies");
    }
    if (options.floor < 0.0 || options.floor > 1.0) {
        throw DataError("weight floor must lie in [0, 1]");
    }

    CategoryWeights weights;
    double lo = 0.0;
    double hi = 0.0;
    bool seen = false;
    for (const auto& entropy : entropies) {
        if (!entropy.has_signal()) {
            continue;
        }
        lo = seen ? std::min(lo, entropy.value) : entropy.value;
        hi = seen ? std::max(hi, entropy.value) : entropy.value;
        seen = true;
    }

    for (const auto& entropy : entropies) {
        double weight = 1.0;
        if (!entropy.has_signal()) {
            weights.no_signal.push_back(entropy.category);
        } else if (options.category_sizes) {
            const auto it = options.category_sizes->find(entropy.category);
            const std::size_t size = it == options.category_sizes->end() ? 0 : it->second;
            if (size > 1) {
                const double max_entropy = std::log(static_cast<double>(size)) / std::log(options.log_base);
                weight = 1.0 - entropy.value / max_entropy;
            }
        } else if (hi > lo) {
            weight = 1.0 - (entropy.value - lo) / (hi - lo);
        }
        weights.values[entropy.category] = std::max(options.floor, std::clamp(weight, 0.0, 1.0));
    }
    return weights;
}

} // namespace corrembed
