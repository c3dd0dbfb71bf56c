#include "tsclust/types.hpp"

#include "tsclust/error.hpp"

namespace tsclust {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows * cols) {
        throw DimensionError("matrix: " + std::to_string(values_.size()) + " values for " + std::to_string(rows) +
                             "x" + std::to_string(cols));
    }
}

void TimeSeriesDataset::validate() const {
    if (ids.size() != size()) throw DimensionError("dataset: id count differs from series count");
    if (!labels.empty()) {
        if (labels.size() != size()) throw DimensionError("dataset: label count differs from series count");
        for (int l : labels)
            if (l < 0 || static_cast<std::size_t>(l) >= class_names.size())
                throw DimensionError("dataset: label " + std::to_string(l) + " has no class name");
    }
}

}  // namespace tsclust
