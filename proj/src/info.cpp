#include "beckman/info.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include "beckman/error.hpp"

namespace beckman {

namespace {

void check_row(const double* row, std::size_t classes, double tolerance, std::size_t index) {
  double sum = 0.0;
  for (std::size_t j = 0; j < classes; ++j) {
    const double v = row[j];
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InputError("prediction row " + std::to_string(index + 1) +
                       " has an entry outside [0, 1]");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > tolerance) {
    std::ostringstream msg;
    msg << "prediction row " << index + 1 << " sums to " << std::setprecision(10) << sum
        << ", not 1";
    throw InputError(msg.str());
  }
}

void renormalize(double* row, std::size_t classes) {
  double sum = 0.0;
  for (std::size_t j = 0; j < classes; ++j) sum += row[j];
  for (std::size_t j = 0; j < classes; ++j) row[j] /= sum;
}

}  // namespace

PredictionSet::PredictionSet(std::size_t classes, std::vector<double> flat,
                             double row_tolerance)
    : classes_(classes), values_(std::move(flat)) {
  if (classes_ == 0) throw InputError("prediction set needs at least one class");
  if (values_.size() % classes_ != 0) {
    throw InputError("prediction values do not fill whole rows");
  }
  for (std::size_t i = 0; i < rows(); ++i) {
    check_row(&values_[i * classes_], classes_, row_tolerance, i);
    renormalize(&values_[i * classes_], classes_);
  }
}

void PredictionSet::append(const std::vector<double>& row, double row_tolerance) {
  if (classes_ == 0) classes_ = row.size();
  if (row.size() != classes_ || classes_ == 0) {
    throw InputError("prediction row has the wrong number of classes");
  }
  check_row(row.data(), classes_, row_tolerance, rows());
  values_.insert(values_.end(), row.begin(), row.end());
  renormalize(&values_[values_.size() - classes_], classes_);
}

double mi_param_output(const PredictionSet& preds) {
  const std::size_t n = preds.rows();
  const std::size_t c = preds.classes();
  if (n == 0) throw InputError("mi_param_output needs at least one prediction");
  double total = 0.0;
  for (std::size_t j = 0; j < c; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += preds(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = preds(i, j) - mean;
      var += d * d;
    }
    total += var / static_cast<double>(n);
  }
  return total / static_cast<double>(c);
}

double mi_pairwise(const PredictionSet& a, const PredictionSet& b) {
  if (a.rows() != b.rows() || a.classes() != b.classes()) {
    throw InputError("mi_pairwise needs prediction sets of equal shape");
  }
  const std::size_t n = a.rows();
  const std::size_t c = a.classes();
  if (n == 0) throw InputError("mi_pairwise needs at least one prediction");

  std::vector<double> joint(c * c, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t y = 0; y < c; ++y) {
      for (std::size_t z = 0; z < c; ++z) joint[y * c + z] += a(i, y) * b(i, z);
    }
  }
  double total = 0.0;
  for (double v : joint) total += v;
  for (double& v : joint) v /= total;

  std::vector<double> row(c, 0.0);
  std::vector<double> col(c, 0.0);
  for (std::size_t y = 0; y < c; ++y) {
    for (std::size_t z = 0; z < c; ++z) {
      row[y] += joint[y * c + z];
      col[z] += joint[y * c + z];
    }
  }
  double mi = 0.0;
  for (std::size_t y = 0; y < c; ++y) {
    for (std::size_t z = 0; z < c; ++z) {
      const double p = joint[y * c + z];
      if (p > 0.0) mi += p * std::log(p / (row[y] * col[z]));
    }
  }
  // Independent inputs can round to a tiny negative sum.
  return std::max(mi, 0.0);
}

PredictionSet read_predictions_csv(const std::filesystem::path& path, double row_tolerance) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  PredictionSet preds;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream fields(line);
    std::string field;
    bool numeric = true;
    while (std::getline(fields, field, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(field, &used));
        if (field.find_first_not_of(" \t", used) != std::string::npos) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
      if (!numeric) break;
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw InputError(path.string() + ": line " + std::to_string(line_no) +
                       " is not numeric");
    }
    first = false;
    try {
      preds.append(row, row_tolerance);
    } catch (const InputError& e) {
      throw InputError(path.string() + ": " + e.what());
    }
  }
  if (preds.rows() == 0) throw InputError(path.string() + ": no prediction rows");
  return preds;
}

void write_predictions_csv(std::ostream& out, const PredictionSet& preds) {
  for (std::size_t j = 0; j < preds.classes(); ++j) out << (j ? ",p" : "p") << j;
  out << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < preds.rows(); ++i) {
    for (std::size_t j = 0; j < preds.classes(); ++j) out << (j ? "," : "") << preds(i, j);
    out << '\n';
  }
}

}  // namespace beckman
