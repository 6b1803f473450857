#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "beckman/image.hpp"

namespace beckman {

struct LabeledDataset {
  std::vector<ImageTensor> images;
  std::vector<std::size_t> labels;
  std::size_t classes = 2;

  std::size_t size() const noexcept { return images.size(); }
  // Equal counts, labels below classes, images in [0, 1] with one shape.
  void validate() const;
};

// Directory layout: labels.csv with rows "file,label" (header "file,label")
// next to the referenced PGM/PPM files.
LabeledDataset read_dataset(const std::filesystem::path& dir);
void write_dataset(const std::filesystem::path& dir, const LabeledDataset& data);

// Procedural 28x28 handwriting-style digits: label 0 is a stroked ellipse,
// label 1 a slanted bar. Stroke width, slant, size, position and contrast vary
// per sample, and each image carries a faint background texture.
LabeledDataset make_toy_digits(std::size_t count, std::uint64_t seed);

}  // namespace beckman
