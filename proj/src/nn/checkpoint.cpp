#include "aislab/nn/checkpoint.hpp"

#include <json.hpp>

#include "aislab/error.hpp"

namespace aislab::nn {

using nlohmann::json;

std::string save_checkpoint(const ParamList& params) {
  json manifest = json::array();
  json values = json::array();
  std::size_t offset = 0;
  for (const Parameter* p : params) {
    manifest.push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}, {"offset", offset}});
    for (Eigen::Index i = 0; i < p->value.size(); ++i) values.push_back(p->value(i));
    offset += static_cast<std::size_t>(p->value.size());
  }
  return json{{"manifest", manifest}, {"values", values}}.dump();
}

void load_checkpoint(const std::string& text, const ParamList& params) {
  try {
    const json doc = json::parse(text);
    const json& manifest = doc.at("manifest");
    const json& values = doc.at("values");
    if (manifest.size() != params.size()) throw InputError("checkpoint: parameter count mismatch");
    for (std::size_t k = 0; k < params.size(); ++k) {
      Parameter& p = *params[k];
      const json& entry = manifest.at(k);
      if (entry.at("name").get<std::string>() != p.name) throw InputError("checkpoint: expected " + p.name);
      const auto rows = entry.at("rows").get<Eigen::Index>();
      const auto cols = entry.at("cols").get<Eigen::Index>();
      if (rows != p.value.rows() || cols != p.value.cols()) throw InputError("checkpoint: shape mismatch for " + p.name);
      const auto offset = entry.at("offset").get<std::size_t>();
      for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value(i) = values.at(offset + static_cast<std::size_t>(i)).get<double>();
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("checkpoint: ") + e.what());
  }
}

}  // namespace aislab::nn
