#include "sspg/diff/checkpoint.hpp"

#include "sspg/error.hpp"

namespace sspg::diff {

namespace {

nlohmann::json flatten(const Matrix& m) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) arr.push_back(m(i, j));
  }
  return arr;
}

Matrix unflatten(const nlohmann::json& arr, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != rows * cols) {
    throw CheckpointError("checkpoint: array '" + what + "' does not match its shape");
  }
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = arr[k++].get<double>();
  }
  return m;
}

}  // namespace

nlohmann::json store_to_json(const ParamStore& store) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [name, p] : store.entries()) {
    params[name] = {{"shape", {p.value.rows(), p.value.cols()}},
                    {"data", flatten(p.value)},
                    {"m", flatten(p.first_moment)},
                    {"v", flatten(p.second_moment)}};
  }
  return {{"step", store.step()}, {"params", params}};
}

ParamStore store_from_json(const nlohmann::json& doc) {
  try {
    ParamStore store;
    for (const auto& [name, entry] : doc.at("params").items()) {
      const auto& shape = entry.at("shape");
      if (!shape.is_array() || shape.size() != 2) {
        throw CheckpointError("checkpoint: bad shape for '" + name + "'");
      }
      const auto r = shape[0].get<Eigen::Index>(), c = shape[1].get<Eigen::Index>();
      store.add(name, unflatten(entry.at("data"), r, c, name));
      Parameter& p = store.mutable_parameter(name);
      p.first_moment = unflatten(entry.at("m"), r, c, name + ".m");
      p.second_moment = unflatten(entry.at("v"), r, c, name + ".v");
    }
    store.set_step(doc.at("step").get<std::int64_t>());
    return store;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint: malformed parameter store: ") + e.what());
  }
}

void require_checkpoint_version(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("version") || !doc["version"].is_string()) {
    throw CheckpointError("checkpoint: missing version field");
  }
  const auto v = doc["version"].get<std::string>();
  if (v != kCheckpointVersion) {
    throw CheckpointError("checkpoint: version '" + v + "' is not supported (expected '" +
                          std::string(kCheckpointVersion) + "')");
  }
}

}  // namespace sspg::diff
