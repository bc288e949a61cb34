#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "uzvec/config.hpp"
#include "uzvec/version.hpp"

namespace uzvec {

// FNV-1a 64 over a file's bytes; a provenance fingerprint, not a
// cryptographic digest.
inline std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open '" + path.string() +
                             "' for digesting");
  }
  std::uint64_t h = 14695981039346656037ull;
  char buf[65536];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  char hex[19];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + hex;
}

// Everything needed to re-run a command identically in deterministic mode.
// Deliberately contains no timestamps or durations, so identical runs write
// byte-identical manifests; wall-clock time is reported on stderr instead.
struct RunManifest {
  std::string subcommand;
  TrainConfig config;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, digest
  std::string output;
};

inline nlohmann::json to_json(const TrainConfig& c) {
  nlohmann::json j;
  j["algo"] = to_string(c.algo);
  j["arch"] = to_string(c.arch);
  j["loss"] = to_string(c.loss);
  j["dim"] = c.dim;
  j["window"] = c.window;
  j["epochs"] = c.epochs;
  j["alpha"] = c.alpha0;
  j["negatives"] = c.negatives;
  j["sample"] = c.sample;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["min_count"] = c.min_count;
  j["minn"] = c.minn;
  j["maxn"] = c.maxn;
  j["bucket"] = c.bucket;
  j["xmax"] = c.xmax;
  j["weight_alpha"] = c.weight_alpha;
  return j;
}

inline void write_manifest(const RunManifest& m,
                           const std::filesystem::path& path) {
  nlohmann::json j;
  j["subcommand"] = m.subcommand;
  j["version"] = kVersion;
  j["config"] = to_json(m.config);
  nlohmann::json inputs = nlohmann::json::object();
  for (const auto& [p, digest] : m.inputs) inputs[p] = digest;
  j["inputs"] = inputs;
  j["output"] = m.output;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open '" + path.string() +
                             "' for writing");
  }
  out << j.dump(2) << '\n';
  if (!out) {
    throw std::runtime_error("write failed for '" + path.string() + "'");
  }
}

inline std::filesystem::path manifest_path_for(
    const std::filesystem::path& output) {
  return std::filesystem::path(output.string() + ".manifest.json");
}

}  // namespace uzvec
