#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "droplab/classifiers.hpp"
#include "droplab/dataset.hpp"
#include "droplab/topic_model.hpp"

namespace droplab {

using Json = nlohmann::ordered_json;

/// Serializes with every floating-point value printed to 17 significant
/// digits; non-finite values become null. indent < 0 gives one line.
std::string dump_json(const Json &value, int indent = 2);

/// {"label_prior", "vocab_size", "topics": [{"id", "rho0", "rho1", "intensity"}]}
Json topic_model_to_json(const TopicModel &model);
TopicModel topic_model_from_json(const Json &j);

/// {"weights", "intercept", "meta"}
Json classifier_to_json(const LinearClassifier &clf, const Json &meta = Json::object());
LinearClassifier classifier_from_json(const Json &j);

/// {"vocab_size", "documents": [{"label", "topic", "topic_value", "length",
///  "indices", "counts"}]} with sparse counts.
Json documents_to_json(std::span<const Document> docs, int vocab_size);
Dataset dataset_from_json(const Json &j);

Json read_json_file(const std::filesystem::path &path);
void write_text_file(const std::filesystem::path &path, const std::string &text);

/// A preset name with optional overrides ("synthetic-sec6:exp_rate=2,block_size=5")
/// or the path of a topic-model JSON file.
GenerativeSampler resolve_model(const std::string &spec);

} // namespace droplab
