#include "jsrda/nn.hpp"

#include "jsrda/error.hpp"

#include <limits>

namespace jsrda {

Labels nn_classify(const Matrix& train, const Labels& train_labels, const Matrix& test) {
  if (train.cols() == 0) throw Error("eval", "empty training set");
  if (static_cast<Index>(train_labels.size()) != train.cols())
    throw Error("eval", "training labels do not match training samples");
  if (test.cols() > 0 && test.rows() != train.rows()) {
    throw Error("eval", "feature dimension mismatch: train " + std::to_string(train.rows()) +
                            ", test " + std::to_string(test.rows()));
  }
  Labels out(static_cast<std::size_t>(test.cols()));
  for (Index j = 0; j < test.cols(); ++j) {
    Index best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < train.cols(); ++i) {
      const double dist = (train.col(i) - test.col(j)).squaredNorm();
      if (dist < best_dist) {
        best_dist = dist;
        best = i;
      }
    }
    out[static_cast<std::size_t>(j)] = train_labels[static_cast<std::size_t>(best)];
  }
  return out;
}

double accuracy(const Labels& predicted, const Labels& truth) {
  if (predicted.size() != truth.size()) throw Error("eval", "label vectors differ in length");
  if (truth.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) correct += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(truth.size());
}

}  // namespace jsrda
