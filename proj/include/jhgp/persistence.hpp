#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "jhgp/sampler.hpp"

namespace jhgp {

inline constexpr int kSchemaVersion = 1;

struct FileEntry {
  std::string path;  // relative to the run directory
  std::string role;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  int schema_version = kSchemaVersion;
  std::string command;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> config;
  std::string started;
  std::string finished;
  std::map<std::string, std::map<std::string, double>> acceptance;  // "chain0" -> block -> rate
  std::vector<FileEntry> files;
  std::vector<std::string> flags;
};

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& file);

/// UTC ISO-8601. Honours SOURCE_DATE_EPOCH so repeated runs can be byte identical.
std::string timestamp_now();

/// Writes bytes as-is (LF endings); throws DataError naming the path.
void write_text_file(const std::filesystem::path& file, const std::string& content);
std::string read_text_file(const std::filesystem::path& file);

/// Checksums `dir / rel` and appends it to the inventory.
void register_file(RunManifest& m, const std::filesystem::path& dir, const std::string& rel, const std::string& role);

/// draws_chain{c}.csv per chain, draws_index.csv, draws_meta.json; all registered in `m`.
void write_draws(const PosteriorDraws& draws, const std::filesystem::path& dir, RunManifest& m);

void write_manifest(const RunManifest& m, const std::filesystem::path& dir);
/// Rejects a schema version newer than kSchemaVersion.
RunManifest read_manifest(const std::filesystem::path& dir);
/// Throws DataError on any checksum or size mismatch.
void verify_manifest(const RunManifest& m, const std::filesystem::path& dir);

/// Verifies the manifest, then rebuilds the draws exactly.
PosteriorDraws read_draws(const std::filesystem::path& dir);

/// `key = value` lines, sorted by key.
std::string config_echo_text(const std::map<std::string, std::string>& config);

}  // namespace jhgp
