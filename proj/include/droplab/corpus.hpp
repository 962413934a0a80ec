#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "droplab/dataset.hpp"

namespace droplab {

/// Bag-of-words corpus over a fixed vocabulary. Topic ids are -1.
struct Corpus {
  std::vector<std::string> vocabulary;
  std::unordered_map<std::string, int> index;
  Dataset data;

  int vocab_size() const { return static_cast<int>(vocabulary.size()); }
};

struct SplitSpec {
  /// Number of training documents; when unset, train_fraction is used.
  std::optional<std::size_t> train_size;
  double train_fraction = 0.6;
  std::uint64_t seed = 0;
};

/// Lowercases ASCII and splits on every non-alphanumeric byte.
std::vector<std::string> tokenize(std::string_view text);

/// Parses "label<TAB>text" lines (blank lines skipped), shuffles with the
/// split seed and builds the vocabulary from the training split in order
/// of first appearance. Out-of-vocabulary test tokens are dropped.
std::pair<Corpus, Corpus> load_corpus(const std::filesystem::path &path,
                                      const SplitSpec &split);

/// Same, reading from an in-memory buffer.
std::pair<Corpus, Corpus> parse_corpus(std::string_view text, const SplitSpec &split);

} // namespace droplab
