#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "diffoci/eval.hpp"
#include "diffoci/foci.hpp"
#include "diffoci/training.hpp"

namespace diffoci {

// FNV-1a 64-bit content fingerprint, used for golden pinning in tests and for
// the input hashes recorded in run manifests.
uint64_t fnv1a64(const void* data, size_t len);
uint64_t fnv1a64_str(const std::string& s);
uint64_t fnv1a64_file(const std::string& path);
std::string hash_hex(uint64_t h);

nlohmann::json to_json(const ExperimentConfig& cfg);
nlohmann::json to_json(const SelectionResult& sel);
nlohmann::json to_json(const MetricsResult& m);

// Deterministic report document: config echo, per-epoch metrics, final
// parameters, selected indices. Wall-clock deliberately stays out of this
// document (it lives in the manifest) so reruns are byte-identical.
nlohmann::json report_to_json(const TrainReport& rep);

// Writes JSON with a fixed layout (2-space indent, '\n' terminated).
void write_json(const std::string& path, const nlohmann::json& doc);

}  // namespace diffoci
