#ifndef CORREMBED_TYPES_HPP
#define CORREMBED_TYPES_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace corrembed {

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using ColVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = RowMatrix<double>;
using Vector = ColVector<double>;
using Index = Eigen::Index;

/// Malformed or inconsistent input data (CLI exit code 1).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input that is well-formed but carries no usable signal (CLI exit code 2).
class DegenerateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Rows of a dense matrix paired with item identifiers.
 *
 * Row r of `values` belongs to `item_ids[r]`. Both embedding and tag
 * matrices share this layout; the derived types below keep them from being
 * swapped by accident at call sites.
 */
struct LabeledRows {
    std::vector<std::string> item_ids;
    Matrix values;

    Index rows() const { return values.rows(); }
    Index cols() const { return values.cols(); }

    /// Throws DataError if ids and rows disagree or an entry is non-finite.
    void validate(Index min_rows = 2) const;

    /// Row index of `id`, or -1.
    Index find(const std::string& id) const;
};

struct EmbeddingSet : LabeledRows {
    EmbeddingSet() = default;
    EmbeddingSet(std::vector<std::string> ids, Matrix m) : LabeledRows{std::move(ids), std::move(m)} {}
};

struct TagSet : LabeledRows {
    TagSet() = default;
    TagSet(std::vector<std::string> ids, Matrix m) : LabeledRows{std::move(ids), std::move(m)} {}
};

} // namespace corrembed

#endif // CORREMBED_TYPES_HPP
