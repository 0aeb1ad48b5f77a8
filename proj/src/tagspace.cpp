#include "corrembed/tagspace.hpp"

namespace corrembed {

double CategoryWeights::at(const std::string& category) const
{
    const auto it = values.find(category);
    return it == values.end() ? 1.0 : it->second;
}

const std::set<std::string>& default_dropped_categories()
{
    static const std::set<std::string> dropped{"Size", "Shoe Size"};
    return dropped;
}

TagVocabulary TagVocabulary::build(std::span<const ItemAnnotation> annotations, const std::set<std::string>& dropped)
{
    if (annotations.empty()) {
        throw DataError("no annotations");
    }

    std::set<Tag> distinct;
    for (const auto& annotation : annotations) {
        for (const auto& tag : annotation.tags) {
            if (!dropped.contains(tag.category)) {
                distinct.insert(tag);
            }
        }
    }

    TagVocabulary vocab;
    vocab.dropped_ = dropped;
    vocab.tags_.assign(distinct.begin(), distinct.end());
    for (std::size_t i = 0; i < vocab.tags_.size(); ++i) {
        const Tag& tag = vocab.tags_[i];
        vocab.index_.emplace(tag, i);
        if (vocab.categories_.empty() || vocab.categories_.back() != tag.category) {
            vocab.categories_.push_back(tag.category);
        }
    }
    return vocab;
}

std::optional<std::size_t> TagVocabulary::index_of(const Tag& tag) const
{
    const auto it = index_.find(tag);
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::size_t TagVocabulary::category_size(const std::string& category) const
{
    std::size_t count = 0;
    for (const auto& tag : tags_) {
        count += tag.category == category ? 1 : 0;
    }
    return count;
}

ItemTagVector encode(const ItemAnnotation& annotation, const TagVocabulary& vocab, const CategoryWeights* weights)
{
    ItemTagVector out{annotation.item_id, Vector::Zero(static_cast<Index>(vocab.size()))};
    for (const auto& tag : annotation.tags) {
        if (vocab.is_dropped(tag.category)) {
            continue;
        }
        const auto index = vocab.index_of(tag);
        if (!index) {
            throw DataError("tag (" + tag.category + ", " + tag.name + ") of item '" + annotation.item_id +
                            "' is not in the vocabulary");
        }
        out.values[static_cast<Index>(*index)] = weights ? weights->at(tag.category) : 1.0;
    }
    return out;
}

TagSet encode_all(std::span<const ItemAnnotation> annotations, const TagVocabulary& vocab,
                  const CategoryWeights* weights)
{
    TagSet out;
    out.item_ids.reserve(annotations.size());
    out.values.resize(static_cast<Index>(annotations.size()), static_cast<Index>(vocab.size()));
    for (std::size_t i = 0; i < annotations.size(); ++i) {
        auto encoded = encode(annotations[i], vocab, weights);
        out.values.row(static_cast<Index>(i)) = encoded.values.transpose();
        out.item_ids.push_back(std::move(encoded.item_id));
    }
    return out;
}

} // namespace corrembed
