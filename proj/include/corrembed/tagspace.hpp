#ifndef CORREMBED_TAGSPACE_HPP
#define CORREMBED_TAGSPACE_HPP

#include "corrembed/types.hpp"

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace corrembed {

struct Tag {
    std::string category;
    std::string name;

    auto operator<=>(const Tag&) const = default;
    bool operator==(const Tag&) const = default;
};

/// Tags of one catalogue item. Set semantics: duplicates collapse.
struct ItemAnnotation {
    std::string item_id;
    std::set<Tag> tags;
};

/// Per-category multiplier applied to tag indicators; see weighting.hpp.
struct CategoryWeights {
    std::map<std::string, double> values;
    /// Categories that had no rental signal and were assigned 1.0.
    std::vector<std::string> no_signal;

    /// Weight of `category`; categories absent from the map weigh 1.0.
    double at(const std::string& category) const;
};

const std::set<std::string>& default_dropped_categories();

/**
 * Ordered tag vocabulary defining the tag-vector dimensions.
 *
 * Tags are sorted lexicographically by (category, name), so two runs over the
 * same annotations always produce the same dimension order. Categories in the
 * dropped set contribute no dimensions.
 */
class TagVocabulary {
public:
    TagVocabulary() = default;

    static TagVocabulary build(std::span<const ItemAnnotation> annotations,
                               const std::set<std::string>& dropped = default_dropped_categories());

    std::size_t size() const { return tags_.size(); }
    const std::vector<std::string>& categories() const { return categories_; }
    const std::vector<Tag>& tags() const { return tags_; }
    const std::set<std::string>& dropped() const { return dropped_; }

    bool is_dropped(const std::string& category) const { return dropped_.contains(category); }
    std::optional<std::size_t> index_of(const Tag& tag) const;

    /// Number of tags in `category` (0 if unknown or dropped).
    std::size_t category_size(const std::string& category) const;

private:
    std::vector<std::string> categories_;
    std::vector<Tag> tags_;
    std::map<Tag, std::size_t> index_;
    std::set<std::string> dropped_;
};

inline TagVocabulary build_vocabulary(std::span<const ItemAnnotation> annotations,
                                      const std::set<std::string>& dropped = default_dropped_categories())
{
    return TagVocabulary::build(annotations, dropped);
}

struct ItemTagVector {
    std::string item_id;
    Vector values;
};

/// Indicator encoding; with `weights`, a present tag of category X holds weight(X) instead of 1.
ItemTagVector encode(const ItemAnnotation& annotation, const TagVocabulary& vocab,
                     const CategoryWeights* weights = nullptr);

/// Stack encodings of every annotation into a TagSet, preserving order.
TagSet encode_all(std::span<const ItemAnnotation> annotations, const TagVocabulary& vocab,
                  const CategoryWeights* weights = nullptr);

} // namespace corrembed

#endif // CORREMBED_TAGSPACE_HPP
