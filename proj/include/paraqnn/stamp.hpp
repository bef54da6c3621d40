#pragma once

// Provenance stamp embedded in every manifest, checkpoint, and report.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "paraqnn/errors.hpp"
#include "paraqnn/io.hpp"

#ifndef PARAQNN_VERSION
#define PARAQNN_VERSION "0.1.0"
#endif

namespace paraqnn {

inline constexpr const char* kCodeVersion = PARAQNN_VERSION;

struct Stamp {
  std::string code_version;
  std::string config_hash;
  std::vector<std::uint64_t> seeds;

  friend bool operator==(const Stamp&, const Stamp&) = default;
};

/// Hash of a canonical JSON rendering (object keys are sorted by nlohmann).
inline std::string config_hash(const nlohmann::json& config) {
  return io::checksum_hex(config.dump());
}

inline Stamp version_stamp(const nlohmann::json& config, std::vector<std::uint64_t> seeds) {
  return Stamp{kCodeVersion, config_hash(config), std::move(seeds)};
}

inline nlohmann::json to_json(const Stamp& s) {
  return {{"code_version", s.code_version}, {"config_hash", s.config_hash}, {"seeds", s.seeds}};
}

/// Throws DataError when the stamp is missing or incomplete.
inline Stamp stamp_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("stamp") || !j["stamp"].is_object())
    throw DataError("missing provenance stamp");
  const auto& s = j["stamp"];
  try {
    return Stamp{s.at("code_version").get<std::string>(), s.at("config_hash").get<std::string>(),
                 s.at("seeds").get<std::vector<std::uint64_t>>()};
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("incomplete provenance stamp: ") + e.what());
  }
}

}  // namespace paraqnn
