#include "droplab/dataset.hpp"

#include "droplab/errors.hpp"

namespace droplab {

Dataset Dataset::from_documents(std::span<const Document> docs,
                                int vocab_size) {
  Dataset out;
  const auto n = static_cast<Eigen::Index>(docs.size());
  out.labels.resize(n);
  out.topics.resize(n);
  std::vector<Eigen::Triplet<double>> triplets;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Document &doc = docs[static_cast<std::size_t>(i)];
    if (doc.counts.size() != vocab_size) {
      throw InvalidArgument("document length differs from vocab_size");
    }
    out.labels[i] = doc.label;
    out.topics[i] = doc.topic_id;
    for (Eigen::Index j = 0; j < doc.counts.size(); ++j) {
      if (doc.counts[j] != 0) {
        triplets.emplace_back(i, j, doc.counts[j]);
      }
    }
  }
  out.counts.resize(n, vocab_size);
  out.counts.setFromTriplets(triplets.begin(), triplets.end());
  out.counts.makeCompressed();
  return out;
}

Dataset Dataset::concatenated(const Dataset &other) const {
  if (other.dims() != dims()) {
    throw InvalidArgument("cannot concatenate datasets of different width");
  }
  Dataset out;
  const Eigen::Index n = size() + other.size();
  out.labels.resize(n);
  out.labels << labels, other.labels;
  out.topics.resize(n);
  out.topics << topics, other.topics;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(counts.nonZeros() + other.counts.nonZeros()));
  for (Eigen::Index i = 0; i < size(); ++i) {
    for (CountMatrix::InnerIterator it(counts, i); it; ++it) {
      triplets.emplace_back(i, it.col(), it.value());
    }
  }
  for (Eigen::Index i = 0; i < other.size(); ++i) {
    for (CountMatrix::InnerIterator it(other.counts, i); it; ++it) {
      triplets.emplace_back(size() + i, it.col(), it.value());
    }
  }
  out.counts.resize(n, dims());
  out.counts.setFromTriplets(triplets.begin(), triplets.end());
  out.counts.makeCompressed();
  return out;
}

std::vector<Document> sample_documents(const GenerativeSampler &sampler,
                                       std::size_t n, std::uint64_t seed) {
  std::vector<Document> docs;
  docs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = Rng::stream(seed, {i});
    docs.push_back(sample_document(sampler, rng));
  }
  return docs;
}

} // namespace droplab
