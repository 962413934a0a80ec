#include "droplab/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <sstream>

#include "droplab/errors.hpp"
#include "droplab/random.hpp"

namespace droplab {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 128 && std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) {
    tokens.push_back(std::move(current));
  }
  return tokens;
}

namespace {

struct RawDoc {
  int label;
  std::vector<std::string> tokens;
};

std::vector<RawDoc> parse_lines(std::string_view text) {
  std::vector<RawDoc> docs;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    if (line.empty()) {
      continue;
    }
    if (line.size() < 2 || (line[0] != '0' && line[0] != '1') || line[1] != '\t') {
      throw MalformedInput("expected '<0|1>\\t<text>'", line_no);
    }
    docs.push_back({line[0] - '0', tokenize(line.substr(2))});
  }
  return docs;
}

Corpus build(const std::vector<const RawDoc *> &docs, Corpus corpus, bool grow) {
  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> triplets;
  corpus.data.labels.resize(static_cast<Eigen::Index>(docs.size()));
  corpus.data.topics = Eigen::VectorXi::Constant(static_cast<Eigen::Index>(docs.size()), -1);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    corpus.data.labels[static_cast<Eigen::Index>(i)] = docs[i]->label;
    for (const auto &tok : docs[i]->tokens) {
      auto it = corpus.index.find(tok);
      if (it == corpus.index.end()) {
        if (!grow) {
          continue;
        }
        it = corpus.index.emplace(tok, corpus.vocab_size()).first;
        corpus.vocabulary.push_back(tok);
      }
      triplets.emplace_back(static_cast<int>(i), it->second, 1.0);
    }
  }
  corpus.data.counts.resize(static_cast<Eigen::Index>(docs.size()), corpus.vocab_size());
  corpus.data.counts.setFromTriplets(triplets.begin(), triplets.end()); // sums duplicates
  return corpus;
}

} // namespace

std::pair<Corpus, Corpus> parse_corpus(std::string_view text, const SplitSpec &split) {
  const auto raw = parse_lines(text);
  if (raw.empty()) {
    throw EmptyData("corpus has no documents");
  }
  std::size_t n_train = split.train_size.value_or(static_cast<std::size_t>(
      std::llround(split.train_fraction * static_cast<double>(raw.size()))));
  if (split.train_size && *split.train_size > raw.size()) {
    throw InvalidArgument("train size exceeds corpus size");
  }
  if (!split.train_size && !(split.train_fraction > 0.0 && split.train_fraction <= 1.0)) {
    throw InvalidArgument("train fraction must lie in (0, 1]");
  }
  n_train = std::max<std::size_t>(n_train, 1);

  // Fisher-Yates on indices with the library RNG.
  std::vector<std::size_t> order(raw.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(split.seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
    std::swap(order[i - 1], order[std::min(j, i - 1)]);
  }
  std::vector<const RawDoc *> train_docs;
  std::vector<const RawDoc *> test_docs;
  for (std::size_t k = 0; k < order.size(); ++k) {
    (k < n_train ? train_docs : test_docs).push_back(&raw[order[k]]);
  }
  for (int label : {0, 1}) {
    const bool present = std::any_of(train_docs.begin(), train_docs.end(),
                                     [&](const RawDoc *d) { return d->label == label; });
    if (!present) {
      throw DegenerateData("training split has no documents of class " +
                           std::to_string(label));
    }
  }
  Corpus train = build(train_docs, Corpus{}, true);
  Corpus test;
  test.vocabulary = train.vocabulary;
  test.index = train.index;
  test = build(test_docs, std::move(test), false);
  return {std::move(train), std::move(test)};
}

std::pair<Corpus, Corpus> load_corpus(const std::filesystem::path &path,
                                      const SplitSpec &split) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InvalidArgument("cannot open corpus file " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_corpus(buf.str(), split);
}

} // namespace droplab
