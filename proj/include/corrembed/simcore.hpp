#ifndef CORREMBED_SIMCORE_HPP
#define CORREMBED_SIMCORE_HPP

#include "corrembed/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace corrembed {

enum class Operand { left, right };

/// A cosine operand had zero norm (an untagged item or an all-zero embedding).
class ZeroNormError : public DataError {
public:
    ZeroNormError(Operand side, std::string item_id = {}, const std::string& context = {})
        : DataError(describe(side, item_id, context)), side_(side), item_id_(std::move(item_id))
    {
    }

    Operand side() const { return side_; }
    const std::string& item_id() const { return item_id_; }

private:
    static std::string describe(Operand side, const std::string& item_id, const std::string& context)
    {
        std::string msg = context.empty() ? (side == Operand::left ? "zero-norm left operand" : "zero-norm right operand")
                                          : "zero-norm " + context + " row";
        if (!item_id.empty()) {
            msg += " (item '" + item_id + "')";
        }
        return msg;
    }

    Operand side_;
    std::string item_id_;
};

template <typename Scalar>
Scalar clamp_unit(Scalar value)
{
    return std::clamp(value, Scalar(-1), Scalar(1));
}

/// a·b / (‖a‖‖b‖), clamped to [-1, 1].
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b)
{
    using Scalar = typename DerivedA::Scalar;
    if (a.size() != b.size()) {
        throw DataError("cosine: operand sizes differ (" + std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()) + ")");
    }
    const Scalar sq_a = a.squaredNorm();
    const Scalar sq_b = b.squaredNorm();
    if (sq_a == Scalar(0)) {
        throw ZeroNormError(Operand::left);
    }
    if (sq_b == Scalar(0)) {
        throw ZeroNormError(Operand::right);
    }
    const Scalar dot = a.derived().reshaped().dot(b.derived().reshaped());
    // One sqrt keeps parallel and antiparallel pairs at exactly +-1 more often.
    return clamp_unit(dot / std::sqrt(sq_a * sq_b));
}

/**
 * Sample Pearson correlation, two-pass (means first, then centered sums).
 *
 * Returns nullopt when either input is constant. Throws DataError on a length
 * mismatch or fewer than two observations.
 */
template <typename DerivedX, typename DerivedY>
std::optional<double> pearson(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y)
{
    if (x.size() != y.size()) {
        throw DataError("pearson: length mismatch (" + std::to_string(x.size()) + " vs " +
                        std::to_string(y.size()) + ")");
    }
    if (x.size() < 2) {
        throw DataError("pearson: at least two observations required");
    }
    const auto xs = x.template cast<double>().reshaped().eval();
    const auto ys = y.template cast<double>().reshaped().eval();
    if (xs.maxCoeff() == xs.minCoeff() || ys.maxCoeff() == ys.minCoeff()) {
        return std::nullopt;
    }
    const auto dx = (xs.array() - xs.mean()).eval();
    const auto dy = (ys.array() - ys.mean()).eval();
    const double sxx = dx.square().sum();
    const double syy = dy.square().sum();
    if (sxx == 0.0 || syy == 0.0) {
        return std::nullopt;
    }
    return clamp_unit((dx * dy).sum() / (std::sqrt(sxx) * std::sqrt(syy)));
}

/**
 * Cosine similarity profiles over the rows of a labeled matrix.
 *
 * Row norms are computed once at construction; a zero row raises
 * ZeroNormError naming the item.
 */
class CosineProfiles {
public:
    explicit CosineProfiles(const LabeledRows& set, const std::string& context = {});
    CosineProfiles(LabeledRows&&, const std::string& = {}) = delete;

    Index size() const { return rows_.rows(); }

    /// Cosine of row i against every row j in ascending order, skipping j == i unless include_self.
    Vector profile(Index i, bool include_self = false) const;

private:
    const Matrix& rows_;
    Vector norms_;
};

/// Free-standing form of CosineProfiles::profile.
Vector similarity_profile(const LabeledRows& set, Index i, bool include_self = false);

enum class ZeroRowPolicy {
    error, ///< a zero tag or embedding row aborts scoring
    drop,  ///< items with a zero row on either side are removed before scoring
};

struct CorrEmbedOptions {
    /// Number of query items; nullopt scores every item.
    std::optional<std::size_t> sample;
    std::uint64_t seed = 0;
    bool include_self = false;
    /// 0 selects the hardware thread count.
    unsigned threads = 0;
    ZeroRowPolicy zero_rows = ZeroRowPolicy::error;
};

struct ItemCorrelation {
    std::string item_id;
    std::optional<double> correlation;
};

struct CorrEmbedResult {
    /// Scored query items in ascending row order.
    std::vector<ItemCorrelation> per_item;
    double mean = 0.0;
    std::size_t n_scored = 0;
    std::size_t n_skipped = 0;
    /// Items removed under ZeroRowPolicy::drop.
    std::vector<std::string> dropped;
};

/**
 * Mean over query items of the Pearson correlation between the item's
 * tag-space and embedding-space cosine profiles.
 *
 * Items whose profile on either side is constant have an undefined
 * correlation; they are counted in n_skipped and left out of the mean. If no
 * item is defined a DegenerateError is thrown.
 */
CorrEmbedResult corr_embed(const EmbeddingSet& images, const TagSet& tags, const CorrEmbedOptions& options = {});

/// Throws DataError naming the first position where the two id lists differ.
void require_aligned(const LabeledRows& a, const LabeledRows& b);

} // namespace corrembed

#endif // CORREMBED_SIMCORE_HPP
