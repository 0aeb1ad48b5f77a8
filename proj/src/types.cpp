#include "corrembed/types.hpp"

namespace corrembed {

void LabeledRows::validate(Index min_rows) const
{
    if (static_cast<Index>(item_ids.size()) != values.rows()) {
        throw DataError("item id count (" + std::to_string(item_ids.size()) + ") does not match row count (" +
                        std::to_string(values.rows()) + ")");
    }
    if (values.rows() < min_rows) {
        throw DataError("n >= " + std::to_string(min_rows) + " required, got " + std::to_string(values.rows()));
    }
    if (!values.allFinite()) {
        for (Index r = 0; r < values.rows(); ++r) {
            if (!values.row(r).allFinite()) {
                throw DataError("non-finite entry in row of item '" + item_ids[static_cast<std::size_t>(r)] + "'");
            }
        }
    }
}

Index LabeledRows::find(const std::string& id) const
{
    for (std::size_t r = 0; r < item_ids.size(); ++r) {
        if (item_ids[r] == id) {
            return static_cast<Index>(r);
        }
    }
    return -1;
}

} // namespace corrembed
