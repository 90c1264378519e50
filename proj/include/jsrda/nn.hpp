#pragma once

#include "jsrda/types.hpp"

namespace jsrda {

/// Label of the Euclidean-nearest training column for every test column.
/// Ties go to the lowest training index.
Labels nn_classify(const Matrix& train, const Labels& train_labels, const Matrix& test);

/// Fraction of positions where the two label vectors agree.
double accuracy(const Labels& predicted, const Labels& truth);

}  // namespace jsrda
