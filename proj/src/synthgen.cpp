#include "corrembed/synthgen.hpp"

#include <cmath>
#include <cstdio>
#include <random>

namespace corrembed {

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint32_t purpose)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), purpose};
    return std::mt19937_64(seq);
}

std::string numbered(const char* prefix, std::size_t i, int width)
{
    char buffer[48];
    std::snprintf(buffer, sizeof(buffer), "%s%0*zu", prefix, width, i);
    return buffer;
}

// Tag names grouped by category; the first T % C categories get one extra tag.
std::vector<std::vector<std::string>> layout_tags(const SynthSpec& spec)
{
    std::vector<std::vector<std::string>> names(spec.categories);
    for (std::size_t c = 0; c < spec.categories; ++c) {
        const std::size_t count = spec.tags / spec.categories + (c < spec.tags % spec.categories ? 1 : 0);
        for (std::size_t t = 0; t < count; ++t) {
            names[c].push_back(numbered("tag", t, 3));
        }
    }
    return names;
}

std::vector<RentalHistory> draw_histories(const SynthSpec& spec, const std::vector<std::vector<std::size_t>>& item_tags,
                                          const std::vector<std::string>& item_ids,
                                          const std::vector<std::vector<std::string>>& names)
{
    auto rng = stream(spec.seed, 2);
    const std::size_t categories = spec.categories;
    std::vector<RentalHistory> histories;
    histories.reserve(spec.customers);

    std::vector<std::size_t> preferred(categories);
    std::vector<std::size_t> wanted(categories);
    std::vector<std::size_t> best;
    for (std::size_t k = 0; k < spec.customers; ++k) {
        RentalHistory history{numbered("customer", k, 5), {}};
        for (std::size_t c = 0; c < categories; ++c) {
            preferred[c] = std::uniform_int_distribution<std::size_t>(0, names[c].size() - 1)(rng);
        }
        for (std::size_t r = 0; r < spec.rentals_per_customer; ++r) {
            for (std::size_t c = 0; c < categories; ++c) {
                // Loyalty falls linearly from 0.95 for the first category to 0.05 for the last.
                const double loyalty =
                    categories == 1 ? 0.95 : 0.95 - 0.9 * static_cast<double>(c) / static_cast<double>(categories - 1);
                wanted[c] = std::bernoulli_distribution(loyalty)(rng)
                                ? preferred[c]
                                : std::uniform_int_distribution<std::size_t>(0, names[c].size() - 1)(rng);
            }
            // Pick the item matching the wanted tags, earlier categories taking priority.
            best.clear();
            std::vector<bool> best_key;
            for (std::size_t i = 0; i < item_tags.size(); ++i) {
                std::vector<bool> key(categories);
                for (std::size_t c = 0; c < categories; ++c) {
                    key[c] = item_tags[i][c] == wanted[c];
                }
                if (best.empty() || key > best_key) {
                    best_key = std::move(key);
                    best.assign(1, i);
                } else if (key == best_key) {
                    best.push_back(i);
                }
            }
            const auto pick = std::uniform_int_distribution<std::size_t>(0, best.size() - 1)(rng);
            history.item_ids.push_back(item_ids[best[pick]]);
        }
        histories.push_back(std::move(history));
    }
    return histories;
}

} // namespace

void SynthSpec::validate() const
{
    if (n < 3) {
        throw DataError("synth: n >= 3 required");
    }
    if (categories < 1 || tags < categories) {
        throw DataError("synth: need tags >= categories >= 1");
    }
    if (dim < 1) {
        throw DataError("synth: dim >= 1 required");
    }
    if (!(noise >= 0.0) || !std::isfinite(noise)) {
        throw DataError("synth: noise must be finite and >= 0");
    }
}

SynthData generate(const SynthSpec& spec)
{
    spec.validate();
    const auto names = layout_tags(spec);

    SynthData data;
    auto item_rng = stream(spec.seed, 1);
    std::vector<std::vector<std::size_t>> item_tags(spec.n, std::vector<std::size_t>(spec.categories));
    std::vector<std::string> item_ids;
    for (std::size_t i = 0; i < spec.n; ++i) {
        ItemAnnotation annotation{numbered("item", i, 6), {}};
        for (std::size_t c = 0; c < spec.categories; ++c) {
            const auto t = std::uniform_int_distribution<std::size_t>(0, names[c].size() - 1)(item_rng);
            item_tags[i][c] = t;
            annotation.tags.insert({numbered("cat", c, 3), names[c][t]});
        }
        item_ids.push_back(annotation.item_id);
        data.annotations.push_back(std::move(annotation));
    }

    data.vocabulary = build_vocabulary(data.annotations, {});
    data.histories = draw_histories(spec, item_tags, item_ids, names);

    const auto index = index_annotations(data.annotations);
    const auto entropies = category_entropies(data.histories, index, data.vocabulary);
    data.weights = tag_weights(entropies);

    data.unweighted_tags = encode_all(data.annotations, data.vocabulary);
    data.tags = encode_all(data.annotations, data.vocabulary, &data.weights);

    if (spec.model == EmbeddingModel::identity) {
        data.embeddings = EmbeddingSet{data.tags.item_ids, data.tags.values};
        return data;
    }

    const auto vocab_size = static_cast<Index>(data.vocabulary.size());
    const auto dim = static_cast<Index>(spec.dim);
    Vector salience = Vector::Ones(vocab_size);
    if (spec.salience == Salience::entropy_weights) {
        for (Index t = 0; t < vocab_size; ++t) {
            salience[t] = data.weights.at(data.vocabulary.tags()[static_cast<std::size_t>(t)].category);
        }
    }

    auto map_rng = stream(spec.seed, 3);
    std::normal_distribution<double> normal;
    Matrix gaussian(dim, vocab_size);
    for (Index r = 0; r < dim; ++r) {
        for (Index c = 0; c < vocab_size; ++c) {
            gaussian(r, c) = normal(map_rng);
        }
    }
    Matrix map;
    if (dim >= vocab_size) {
        Eigen::HouseholderQR<Matrix> qr(gaussian);
        map = qr.householderQ() * Matrix::Identity(dim, vocab_size);
    } else {
        map = gaussian / std::sqrt(static_cast<double>(dim));
    }

    Matrix values = (data.unweighted_tags.values * salience.asDiagonal()) * map.transpose();

    auto noise_rng = stream(spec.seed, 4);
    std::normal_distribution<double> noise_normal;
    for (Index r = 0; r < values.rows(); ++r) {
        for (Index c = 0; c < values.cols(); ++c) {
            values(r, c) += spec.noise * noise_normal(noise_rng);
        }
    }
    data.embeddings = EmbeddingSet{data.unweighted_tags.item_ids, std::move(values)};
    return data;
}

} // namespace corrembed
