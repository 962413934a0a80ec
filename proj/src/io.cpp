#include "droplab/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "droplab/errors.hpp"

namespace droplab {

namespace {

void emit(const Json &v, int indent, int depth, std::string &out) {
  const auto newline = [&](int level) {
    if (indent >= 0) {
      out.push_back('\n');
      out.append(static_cast<std::size_t>(indent * level), ' ');
    }
  };
  switch (v.type()) {
  case Json::value_t::number_float: {
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
      out += "null";
      return;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out += buf;
    return;
  }
  case Json::value_t::array: {
    if (v.empty()) {
      out += "[]";
      return;
    }
    // Numeric arrays stay on one line.
    const bool flat = std::all_of(v.begin(), v.end(),
                                  [](const Json &e) { return e.is_number(); });
    out.push_back('[');
    bool first = true;
    for (const auto &e : v) {
      if (!first) {
        out.push_back(',');
        if (flat && indent >= 0) {
          out.push_back(' ');
        }
      }
      first = false;
      if (!flat) {
        newline(depth + 1);
      }
      emit(e, indent, depth + 1, out);
    }
    if (!flat) {
      newline(depth);
    }
    out.push_back(']');
    return;
  }
  case Json::value_t::object: {
    if (v.empty()) {
      out += "{}";
      return;
    }
    out.push_back('{');
    bool first = true;
    for (const auto &[key, e] : v.items()) {
      if (!first) {
        out.push_back(',');
      }
      first = false;
      newline(depth + 1);
      out += Json(key).dump();
      out += indent >= 0 ? ": " : ":";
      emit(e, indent, depth + 1, out);
    }
    newline(depth);
    out.push_back('}');
    return;
  }
  default:
    out += v.dump();
  }
}

Eigen::VectorXd vector_from(const Json &j, const char *what) {
  if (!j.is_array()) {
    throw InvalidArgument(std::string(what) + " must be an array");
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Json vector_to(const Eigen::Ref<const Eigen::VectorXd> &v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    a.push_back(v[i]);
  }
  return a;
}

template <typename F> auto guarded(F &&f) {
  try {
    return f();
  } catch (const Json::exception &e) {
    throw InvalidArgument(std::string("bad JSON: ") + e.what());
  }
}

} // namespace

std::string dump_json(const Json &value, int indent) {
  std::string out;
  emit(value, indent, 0, out);
  out.push_back('\n');
  return out;
}

Json topic_model_to_json(const TopicModel &model) {
  Json topics = Json::array();
  for (const auto &t : model.topics()) {
    topics.push_back({{"id", t.id},
                      {"rho0", t.rho0},
                      {"rho1", t.rho1},
                      {"intensity", vector_to(t.intensity)}});
  }
  return {{"label_prior", model.label_prior()},
          {"vocab_size", model.vocab_size()},
          {"topics", topics}};
}

TopicModel topic_model_from_json(const Json &j) {
  return guarded([&] {
    std::vector<Topic> topics;
    for (const auto &tj : j.at("topics")) {
      Topic t;
      t.id = tj.at("id").get<int>();
      t.rho0 = tj.at("rho0").get<double>();
      t.rho1 = tj.at("rho1").get<double>();
      t.intensity = vector_from(tj.at("intensity"), "intensity");
      topics.push_back(std::move(t));
    }
    return TopicModel(j.at("label_prior").get<double>(), j.at("vocab_size").get<int>(),
                      std::move(topics));
  });
}

Json classifier_to_json(const LinearClassifier &clf, const Json &meta) {
  return {{"weights", vector_to(clf.weights)}, {"intercept", clf.intercept}, {"meta", meta}};
}

LinearClassifier classifier_from_json(const Json &j) {
  return guarded([&] {
    LinearClassifier clf;
    clf.weights = vector_from(j.at("weights"), "weights");
    clf.intercept = j.at("intercept").get<double>();
    return clf;
  });
}

Json documents_to_json(std::span<const Document> docs, int vocab_size) {
  Json list = Json::array();
  for (const auto &d : docs) {
    Json idx = Json::array();
    Json cnt = Json::array();
    for (Eigen::Index k = 0; k < d.counts.size(); ++k) {
      if (d.counts[k] != 0) {
        idx.push_back(k);
        cnt.push_back(d.counts[k]);
      }
    }
    list.push_back({{"label", d.label},
                    {"topic", d.topic_id},
                    {"topic_value", d.topic_value},
                    {"length", d.length},
                    {"indices", idx},
                    {"counts", cnt}});
  }
  return {{"vocab_size", vocab_size}, {"documents", list}};
}

Dataset dataset_from_json(const Json &j) {
  return guarded([&] {
    const int d = j.at("vocab_size").get<int>();
    if (d < 1) {
      throw InvalidArgument("vocab_size must be positive");
    }
    std::vector<Document> docs;
    for (const auto &dj : j.at("documents")) {
      Document doc;
      doc.label = dj.at("label").get<int>();
      if (doc.label != 0 && doc.label != 1) {
        throw InvalidArgument("labels must be 0 or 1");
      }
      doc.topic_id = dj.value("topic", -1);
      doc.counts = Eigen::VectorXi::Zero(d);
      const auto &idx = dj.at("indices");
      const auto &cnt = dj.at("counts");
      if (idx.size() != cnt.size()) {
        throw InvalidArgument("indices and counts differ in length");
      }
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const int col = idx[k].get<int>();
        const int c = cnt[k].get<int>();
        if (col < 0 || col >= d || c < 0) {
          throw InvalidArgument("document entry out of range");
        }
        doc.counts[col] += c;
      }
      doc.length = doc.counts.sum();
      docs.push_back(std::move(doc));
    }
    return Dataset::from_documents(docs, d);
  });
}

Json read_json_file(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidArgument("cannot open " + path.string());
  }
  try {
    return Json::parse(in);
  } catch (const Json::exception &e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path &path, const std::string &text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw InvalidArgument("cannot write " + path.string());
  }
  out << text;
}

GenerativeSampler resolve_model(const std::string &spec) {
  if (spec.empty() || spec == "synthetic-sec6") {
    return preset_sampler("synthetic-sec6");
  }
  if (std::filesystem::exists(spec)) {
    return GenerativeSampler(topic_model_from_json(read_json_file(spec)));
  }
  // name:key=value,key=value
  const auto colon = spec.find(':');
  if (colon == std::string::npos) {
    return preset_sampler(spec);
  }
  std::vector<std::pair<std::string, double>> overrides;
  std::istringstream in(spec.substr(colon + 1));
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto eq = item.find('=');
    std::size_t used = 0;
    double value = 0.0;
    try {
      if (eq != std::string::npos) {
        value = std::stod(item.substr(eq + 1), &used);
      }
    } catch (const std::exception &) {
      used = 0;
    }
    if (eq == std::string::npos || eq == 0 || used == 0 || used != item.size() - eq - 1) {
      throw InvalidArgument("bad model override '" + item + "' (expected key=value)");
    }
    overrides.emplace_back(item.substr(0, eq), value);
  }
  return preset_sampler(spec.substr(0, colon), overrides);
}

} // namespace droplab
