#ifndef CORREMBED_SYNTHGEN_HPP
#define CORREMBED_SYNTHGEN_HPP

#include "corrembed/tagspace.hpp"
#include "corrembed/weighting.hpp"

#include <cstdint>
#include <vector>

namespace corrembed {

enum class EmbeddingModel {
    linear,   ///< fixed random linear map of the scaled tag vector, plus noise
    identity, ///< embeddings are the weighted tag matrix itself
};

enum class Salience {
    uniform,         ///< every category enters the linear map with scale 1
    entropy_weights, ///< each category is scaled by its rental-entropy weight
};

struct SynthSpec {
    std::size_t n = 500;
    std::size_t tags = 20;
    std::size_t categories = 4;
    std::size_t dim = 64;
    double noise = 0.0;
    std::uint64_t seed = 0;
    std::size_t customers = 200;
    std::size_t rentals_per_customer = 12;
    EmbeddingModel model = EmbeddingModel::linear;
    Salience salience = Salience::uniform;

    void validate() const;
};

struct SynthData {
    TagVocabulary vocabulary;
    std::vector<ItemAnnotation> annotations;
    std::vector<RentalHistory> histories;
    CategoryWeights weights;
    TagSet tags;            ///< weighted by `weights`
    TagSet unweighted_tags; ///< plain indicators
    EmbeddingSet embeddings;
};

/**
 * Aligned synthetic catalogue.
 *
 * Each item carries exactly one uniformly drawn tag per category. Customers
 * are loyal to a preferred tag with a probability that decreases with the
 * category index, so category entropies come out increasing in that index.
 * With d >= T the linear map has orthonormal columns and therefore preserves
 * cosines exactly; otherwise it is a scaled Gaussian projection. Noise is
 * sigma times a standard normal draw that does not depend on sigma, so a
 * fixed seed yields nested noise levels.
 */
SynthData generate(const SynthSpec& spec);

} // namespace corrembed

#endif // CORREMBED_SYNTHGEN_HPP
