#include "qdp/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "qdp/random.hpp"

namespace qdp {

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  return out;
}

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && !s.empty();
}

int species_label(std::string name, std::size_t line_no) {
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
  if (name.rfind("iris-", 0) == 0) name = name.substr(5);
  if (name == "setosa") return 0;
  if (name == "versicolor" || name == "versicolour") return 1;
  if (name == "virginica") return 2;
  throw DataError("line " + std::to_string(line_no) + ": unknown species '" + name + "'");
}

}  // namespace

std::vector<IrisRow> parse_iris(std::istream& in) {
  std::vector<IrisRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 5) {
      throw DataError("line " + std::to_string(line_no) + ": expected 5 columns, found " +
                      std::to_string(cells.size()));
    }
    IrisRow row;
    bool numeric = true;
    for (std::size_t i = 0; i < 4; ++i) numeric = numeric && parse_double(cells[i], row.features[i]);
    if (!numeric) {
      if (rows.empty() && line_no == 1) continue;  // header
      throw DataError("line " + std::to_string(line_no) + ": malformed feature value");
    }
    row.label = species_label(cells[4], line_no);
    rows.push_back(row);
  }
  if (rows.size() != 150) {
    throw DataError("expected 150 Iris rows, found " + std::to_string(rows.size()));
  }
  return rows;
}

std::vector<IrisRow> load_iris(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path.string() + "'");
  return parse_iris(in);
}

Example make_example(const std::array<double, 4>& raw, int label) {
  RealVector f(4);
  f << raw[0], raw[1], raw[2], 0.0;
  const double norm = f.norm();
  if (!(norm > 0.0)) throw DataError("example is the zero vector after dropping the fourth feature");
  f /= norm;
  return Example{f, label, amplitude_encode(f, 2)};
}

Dataset preprocess(const std::vector<IrisRow>& raw, std::uint64_t split_seed) {
  std::vector<Example> kept;
  for (const auto& row : raw) {
    if (row.label == 2) continue;
    kept.push_back(make_example(row.features, row.label));
  }
  if (kept.size() != kTrainSize + kTestSize) {
    throw DataError("expected 100 Setosa/Versicolour rows, found " + std::to_string(kept.size()));
  }
  // Fisher-Yates on our own uniform draws so the split does not depend on
  // the standard library's shuffle.
  Rng rng = make_rng(split_seed, "split");
  for (std::size_t i = kept.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i + 1));
    std::swap(kept[i], kept[std::min(j, i)]);
  }
  Dataset d;
  d.seed = split_seed;
  d.train.assign(kept.begin(), kept.begin() + kTrainSize);
  d.test.assign(kept.begin() + kTrainSize, kept.end());
  return d;
}

}  // namespace qdp
