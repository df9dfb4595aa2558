#include "ecc/nn/checkpoint.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ecc::nn {

using nlohmann::json;

std::string checkpoint_to_string(const std::vector<NamedParam>& params, const std::string& meta) {
  json doc;
  doc["format"] = kCheckpointFormat;
  doc["version"] = kCheckpointVersion;
  doc["meta"] = json::parse(meta);
  json tensors = json::array();
  for (const auto& p : params) {
    json t;
    t["name"] = p.name;
    t["shape"] = {p.value->rows(), p.value->cols()};
    std::vector<double> values(p.value->data(), p.value->data() + p.value->size());
    t["values"] = values;
    tensors.push_back(std::move(t));
  }
  doc["tensors"] = std::move(tensors);
  return doc.dump();
}

void save_checkpoint(const std::string& path, const std::vector<NamedParam>& params, const std::string& meta) {
  std::ofstream out(path);
  if (!out) throw CheckpointError("cannot write checkpoint " + path);
  out << checkpoint_to_string(params, meta) << '\n';
  if (!out) throw CheckpointError("failed writing checkpoint " + path);
}

std::string checkpoint_from_string(const std::string& text, const std::vector<NamedParam>& params) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  }
  if (doc.value("format", "") != kCheckpointFormat) throw CheckpointError("not a parameter checkpoint");
  if (doc.value("version", 0) != kCheckpointVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(doc.value("version", 0)));

  std::map<std::string, const json*> by_name;
  for (const auto& t : doc.at("tensors")) by_name[t.at("name").get<std::string>()] = &t;

  std::set<std::string> used;
  for (const auto& p : params) {
    auto it = by_name.find(p.name);
    if (it == by_name.end()) throw CheckpointError("checkpoint lacks tensor '" + p.name + "'");
    const json& t = *it->second;
    const auto rows = t.at("shape").at(0).get<Eigen::Index>();
    const auto cols = t.at("shape").at(1).get<Eigen::Index>();
    if (rows != p.value->rows() || cols != p.value->cols()) {
      std::ostringstream os;
      os << "tensor '" << p.name << "' has shape " << rows << 'x' << cols << ", expected "
         << shape_of(*p.value);
      throw CheckpointError(os.str());
    }
    const auto values = t.at("values").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(values.size()) != rows * cols)
      throw CheckpointError("tensor '" + p.name + "' value count mismatch");
    std::copy(values.begin(), values.end(), p.value->data());
    used.insert(p.name);
  }
  if (used.size() != by_name.size()) throw CheckpointError("checkpoint has unexpected extra tensors");
  return doc.contains("meta") ? doc["meta"].dump() : "{}";
}

std::string load_checkpoint(const std::string& path, const std::vector<NamedParam>& params) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot read checkpoint " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_string(ss.str(), params);
}

}  // namespace ecc::nn
