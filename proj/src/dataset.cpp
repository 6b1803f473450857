#include "beckman/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <string>

#include "beckman/error.hpp"
#include "beckman/random.hpp"

namespace beckman {

namespace {

constexpr std::size_t kDigitSize = 28;

double segment_distance(double px, double py, double ax, double ay, double bx, double by) {
  const double vx = bx - ax;
  const double vy = by - ay;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - ax - t * vx, py - ay - t * vy);
}

// Approximate distance from a point to an axis-aligned ellipse outline after
// undoing its rotation.
double ellipse_distance(double px, double py, double cx, double cy, double rx, double ry,
                        double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double dx = c * (px - cx) + s * (py - cy);
  const double dy = -s * (px - cx) + c * (py - cy);
  const double r = std::hypot(dx / rx, dy / ry);
  if (r == 0.0) return std::min(rx, ry);
  // First-order correction by the gradient norm of the implicit function.
  const double gx = dx / (rx * rx);
  const double gy = dy / (ry * ry);
  const double g = std::hypot(gx, gy) / r;
  return std::abs(r - 1.0) / g;
}

ImageTensor render_digit(std::size_t label, Rng& rng) {
  ImageTensor img(1, kDigitSize, kDigitSize);
  ScalarField& f = img.channel(0);
  const double cx = 13.5 + rng.uniform(-2.5, 2.5);
  const double cy = 13.5 + rng.uniform(-2.0, 2.0);
  const double width = rng.uniform(1.4, 3.0);
  const double ink = rng.uniform(0.55, 1.0);
  const double slant = rng.uniform(-0.35, 0.35);

  // Label 1 sometimes gets a flag stroke, label 0 is sometimes narrow; both
  // bring the classes closer together.
  const double rx = rng.uniform(2.5, 6.5);
  const double ry = rng.uniform(7.0, 10.0);
  const bool flag = rng.uniform() < 0.5;
  const double half = rng.uniform(7.5, 10.0);
  const double flag_len = rng.uniform(2.0, 4.5);

  for (std::size_t y = 0; y < kDigitSize; ++y) {
    for (std::size_t x = 0; x < kDigitSize; ++x) {
      const double px = static_cast<double>(x);
      const double py = static_cast<double>(y);
      double d = 0.0;
      if (label == 0) {
        d = ellipse_distance(px, py, cx, cy, rx, ry, slant);
      } else {
        const double ax = cx + half * std::sin(slant);
        const double ay = cy - half * std::cos(slant);
        const double bx = cx - half * std::sin(slant);
        const double by = cy + half * std::cos(slant);
        d = segment_distance(px, py, ax, ay, bx, by);
        if (flag) {
          d = std::min(d, segment_distance(px, py, ax, ay, ax - flag_len, ay + 0.6 * flag_len));
        }
      }
      const double coverage = std::clamp(0.5 * width + 0.5 - d, 0.0, 1.0);
      f(y, x) = ink * coverage;
    }
  }
  // Quantized to 8 bits so the images survive a PGM round trip unchanged.
  for (double& v : f.values()) {
    v = std::round(std::clamp(v + rng.uniform(0.0, 0.08), 0.0, 1.0) * 255.0) / 255.0;
  }
  return img;
}

}  // namespace

void LabeledDataset::validate() const {
  if (images.size() != labels.size()) throw InputError("image and label counts differ");
  if (classes == 0) throw InputError("dataset needs at least one class");
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (labels[i] >= classes) {
      throw InputError("label " + std::to_string(labels[i]) + " of sample " + std::to_string(i) +
                       " is out of range");
    }
    if (images[i].channels() != images[0].channels() ||
        images[i].height() != images[0].height() || images[i].width() != images[0].width()) {
      throw InputError("sample " + std::to_string(i) + " differs in shape");
    }
    images[i].validate();
  }
}

LabeledDataset read_dataset(const std::filesystem::path& dir) {
  const auto index = dir / "labels.csv";
  std::ifstream in(index);
  if (!in) throw IoError(index.string() + ": cannot open for reading");
  LabeledDataset data;
  std::size_t max_label = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("file,", 0) == 0) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw IoError(index.string() + ": line " + std::to_string(line_no) + " lacks a label");
    }
    const std::string file = line.substr(0, comma);
    std::size_t label = 0;
    try {
      std::size_t used = 0;
      const long v = std::stol(line.substr(comma + 1), &used);
      if (v < 0) throw std::invalid_argument("negative");
      label = static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      throw IoError(index.string() + ": line " + std::to_string(line_no) + " has a bad label");
    }
    data.images.push_back(read_pnm(dir / file));
    data.labels.push_back(label);
    max_label = std::max(max_label, label);
  }
  data.classes = std::max<std::size_t>(2, max_label + 1);
  data.validate();
  return data;
}

void write_dataset(const std::filesystem::path& dir, const LabeledDataset& data) {
  data.validate();
  std::filesystem::create_directories(dir);
  std::ofstream index(dir / "labels.csv");
  if (!index) throw IoError((dir / "labels.csv").string() + ": cannot open for writing");
  index << "file,label\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::ostringstream name;
    name << "img_" << std::setw(5) << std::setfill('0') << i
         << (data.images[i].channels() == 1 ? ".pgm" : ".ppm");
    write_pnm(dir / name.str(), data.images[i]);
    index << name.str() << ',' << data.labels[i] << '\n';
  }
}

LabeledDataset make_toy_digits(std::size_t count, std::uint64_t seed) {
  LabeledDataset data;
  data.classes = 2;
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t label = rng.below(2);
    data.images.push_back(render_digit(label, rng));
    data.labels.push_back(label);
  }
  return data;
}

}  // namespace beckman
