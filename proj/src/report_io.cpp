#include "diffoci/report_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "diffoci/errors.hpp"

namespace diffoci {

uint64_t fnv1a64(const void* data, size_t len) {
  const unsigned char* bytes = static_cast<const unsigned char*>(data);
  uint64_t h = 0xcbf29ce484222325ULL;
  for (size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t fnv1a64_str(const std::string& s) { return fnv1a64(s.data(), s.size()); }

uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open for hashing: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string content = ss.str();
  return fnv1a64_str(content);
}

std::string hash_hex(uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["objective"] = to_string(cfg.objective);
  j["param_kind"] = to_string(cfg.param_kind);
  j["hidden"] = cfg.hidden;
  j["beta"] = cfg.beta;
  j["upsilon"] = cfg.upsilon;
  j["gamma"] = cfg.gamma;
  j["weight_decay"] = cfg.weight_decay;
  j["batch_size"] = cfg.batch_size;
  j["epochs"] = cfg.epochs;
  j["eta"] = cfg.eta;
  j["weighting"] = to_string(cfg.weighting);
  j["optimizer"] = cfg.effective_optimizer() == OptimKind::kAdam ? "adam" : "sgd";
  j["clip_final_all"] = cfg.clip_final_all;
  j["seed"] = cfg.seed;
  return j;
}

nlohmann::json to_json(const SelectionResult& sel) {
  nlohmann::json j;
  j["selected"] = sel.selected;
  j["scores"] = sel.scores;
  j["stopped_reason"] = to_string(sel.stopped_reason);
  j["t_n_calls"] = sel.t_n_calls;
  return j;
}

nlohmann::json to_json(const MetricsResult& m) {
  nlohmann::json j;
  j["mse"] = m.mse;
  if (m.classification) {
    j["accuracy"] = m.accuracy;
    j["logloss"] = m.logloss;
    if (m.worst_group_accuracy) j["worst_group_accuracy"] = *m.worst_group_accuracy;
  }
  return j;
}

nlohmann::json report_to_json(const TrainReport& rep) {
  nlohmann::json j;
  j["config"] = to_json(rep.config);
  j["epoch_objective"] = rep.epoch_objective;
  if (!rep.epoch_regularizer.empty()) j["epoch_regularizer"] = rep.epoch_regularizer;
  nlohmann::json params = nlohmann::json::array();
  for (const NamedTensor& t : rep.final_params) {
    nlohmann::json tj;
    tj["name"] = t.name;
    tj["rows"] = t.value.rows;
    tj["cols"] = t.value.cols;
    tj["values"] = t.value.a;
    params.push_back(tj);
  }
  j["final_params"] = params;
  if (!rep.final_theta.empty()) {
    j["final_theta"] = rep.final_theta;
    j["clipped_theta"] = rep.clipped_theta;
  }
  j["selected"] = rep.selected;
  j["skipped_batches"] = rep.skipped_batches;
  return j;
}

void write_json(const std::string& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open for writing: " + path);
  out << doc.dump(2) << "\n";
}

}  // namespace diffoci
