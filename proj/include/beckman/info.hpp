#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace beckman {

// n rows of class probabilities over C classes.
class PredictionSet {
 public:
  PredictionSet() = default;
  // Each row must sum to 1 within row_tolerance and lie in [0, 1]; rows are
  // then renormalized to sum exactly to 1.
  PredictionSet(std::size_t classes, std::vector<double> flat, double row_tolerance = 1e-6);

  std::size_t rows() const noexcept { return classes_ == 0 ? 0 : values_.size() / classes_; }
  std::size_t classes() const noexcept { return classes_; }
  double operator()(std::size_t row, std::size_t cls) const {
    return values_[row * classes_ + cls];
  }
  const std::vector<double>& values() const noexcept { return values_; }

  void append(const std::vector<double>& row, double row_tolerance = 1e-6);

 private:
  std::size_t classes_ = 0;
  std::vector<double> values_;
};

// Softmax-variance surrogate for the parameter/output mutual information:
// (1/C) sum_j (1/n) sum_i (p_ij - pbar_j)^2.
double mi_param_output(const PredictionSet& preds);

// Mutual information of the joint P = (1/n) sum_i p_i q_i^T, in nats.
double mi_pairwise(const PredictionSet& a, const PredictionSet& b);

// CSV of n rows x C probability columns. An optional header row is skipped
// when its first field is not numeric. Rows whose sum is off by more than
// row_tolerance raise InputError naming the 1-based data row.
PredictionSet read_predictions_csv(const std::filesystem::path& path,
                                   double row_tolerance = 1e-3);
void write_predictions_csv(std::ostream& out, const PredictionSet& preds);

}  // namespace beckman
