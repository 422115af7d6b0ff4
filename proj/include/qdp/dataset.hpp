#pragma once

// Iris ingestion and the binary (Setosa vs Versicolour) preprocessing pipeline.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "qdp/circuits.hpp"

namespace qdp {

struct IrisRow {
  std::array<double, 4> features{};
  int label = 0;  // 0 Setosa, 1 Versicolour, 2 Virginica
};

/// Parses 150 rows of "f0,f1,f2,f3,species". A non-numeric first line is
/// treated as a header. Species names are case-insensitive and may carry
/// an "Iris-" prefix. Throws DataError.
std::vector<IrisRow> parse_iris(std::istream& in);
std::vector<IrisRow> load_iris(const std::filesystem::path& path);

struct Example {
  RealVector features;  // unit norm, features[3] == 0
  int label = 0;
  EncodedInput encoded;
};

struct Dataset {
  std::vector<Example> train;
  std::vector<Example> test;
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kTrainSize = 60;
inline constexpr std::size_t kTestSize = 40;

/// Zeroes the fourth feature, l2-normalises and amplitude-encodes on two qubits.
Example make_example(const std::array<double, 4>& raw, int label);

/// Drops Virginica, preprocesses every row and splits 60/40 with a seeded shuffle.
Dataset preprocess(const std::vector<IrisRow>& raw, std::uint64_t split_seed);

}  // namespace qdp
