#include "jhgp/persistence.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>

#include "jhgp/csv.hpp"
#include "jhgp/errors.hpp"

namespace jhgp {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw NumericalError("sha256: digest failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

std::string read_text_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot read " + file.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string sha256_file(const fs::path& file) { return sha256_hex(read_text_file(file)); }

std::string timestamp_now() {
  std::time_t t;
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env != nullptr && *env != '\0') {
    t = static_cast<std::time_t>(std::strtoll(env, nullptr, 10));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text_file(const fs::path& file, const std::string& content) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + file.string());
  out << content;
  if (!out) throw DataError("write failed for " + file.string());
}

void register_file(RunManifest& m, const fs::path& dir, const std::string& rel, const std::string& role) {
  const std::string bytes = read_text_file(dir / rel);
  m.files.push_back(FileEntry{rel, role, sha256_hex(bytes), bytes.size()});
}

namespace {

json layout_json(const DrawLayout& l) {
  json j;
  j["mode"] = to_string(l.mode);
  j["global_ticks"] = l.global_ticks;
  j["subject_ids"] = l.subject_ids;
  j["subject_ticks"] = l.subject_ticks;
  j["psi_kernel"] = l.psi_kernel.to_text();
  j["mu_y_kernel"] = l.mu_y_kernel.to_text();
  j["mu_h_kernel"] = l.mu_h_kernel.to_text();
  j["has_omega"] = l.has_omega;
  return j;
}

DrawLayout layout_from_json(const json& j) {
  DrawLayout l;
  l.mode = model_mode_from_string(j.at("mode").get<std::string>());
  l.global_ticks = j.at("global_ticks").get<std::vector<Tick>>();
  l.subject_ids = j.at("subject_ids").get<std::vector<std::string>>();
  l.subject_ticks = j.at("subject_ticks").get<std::vector<std::vector<Tick>>>();
  l.psi_kernel = KernelSpec::from_text(j.at("psi_kernel").get<std::string>());
  l.mu_y_kernel = KernelSpec::from_text(j.at("mu_y_kernel").get<std::string>());
  l.mu_h_kernel = KernelSpec::from_text(j.at("mu_h_kernel").get<std::string>());
  l.has_omega = j.at("has_omega").get<bool>();
  return l;
}

json chain_json(const ChainMeta& c) {
  return json{{"seed", c.seed},         {"chain", c.chain},          {"iterations", c.iterations},
              {"burn_in", c.burn_in},   {"thin", c.thin},            {"acceptance", c.acceptance},
              {"step_size", c.step_size}};
}

ChainMeta chain_from_json(const json& j) {
  ChainMeta c;
  c.seed = j.at("seed").get<std::uint64_t>();
  c.chain = j.at("chain").get<int>();
  c.iterations = j.at("iterations").get<int>();
  c.burn_in = j.at("burn_in").get<int>();
  c.thin = j.at("thin").get<int>();
  c.acceptance = j.at("acceptance").get<std::map<std::string, double>>();
  c.step_size = j.at("step_size").get<std::map<std::string, double>>();
  return c;
}

std::string chain_file(int c) { return "draws_chain" + std::to_string(c) + ".csv"; }

}  // namespace

void write_draws(const PosteriorDraws& draws, const fs::path& dir, RunManifest& m) {
  if (!fs::is_directory(dir)) throw DataError("output directory does not exist: " + dir.string());
  std::vector<int> chains;
  for (const auto& c : draws.chains) chains.push_back(c.chain);
  for (int c : draws.chain_of) {
    if (std::find(chains.begin(), chains.end(), c) == chains.end()) chains.push_back(c);
  }
  if (chains.empty()) chains.push_back(0);

  const auto names = state_column_names(draws.layout);
  std::string header = "iteration";
  for (const auto& n : names) header += "," + n;
  header += "\n";

  std::ostringstream index;
  index << "draw,chain,iteration,file,row\n";
  std::size_t draw_no = 0;
  json files = json::array();
  for (int c : chains) {
    std::ostringstream os;
    os << header;
    std::size_t row = 0;
    for (std::size_t k = 0; k < draws.states.size(); ++k) {
      if (draws.chain_of[k] != c) continue;
      os << draws.iteration_of[k];
      for (const auto& [name, v] : flatten_state(draws.states[k], draws.layout)) os << ',' << format_double(v);
      os << '\n';
      index << draw_no++ << ',' << c << ',' << draws.iteration_of[k] << ',' << chain_file(c) << ',' << ++row << '\n';
    }
    write_text_file(dir / chain_file(c), os.str());
    register_file(m, dir, chain_file(c), "draws");
    files.push_back(json{{"chain", c}, {"file", chain_file(c)}, {"rows", row}});
  }
  write_text_file(dir / "draws_index.csv", index.str());
  register_file(m, dir, "draws_index.csv", "draws_index");

  json meta;
  meta["schema_version"] = kSchemaVersion;
  meta["layout"] = layout_json(draws.layout);
  meta["chains"] = json::array();
  for (const auto& c : draws.chains) meta["chains"].push_back(chain_json(c));
  meta["files"] = files;
  meta["config"] = draws.config_echo;
  write_text_file(dir / "draws_meta.json", meta.dump(2) + "\n");
  register_file(m, dir, "draws_meta.json", "draws_meta");

  for (const auto& c : draws.chains) m.acceptance["chain" + std::to_string(c.chain)] = c.acceptance;
  if (draws.states.empty()) m.flags.push_back("empty_draws");
}

void write_manifest(const RunManifest& m, const fs::path& dir) {
  json j;
  j["schema_version"] = m.schema_version;
  j["command"] = m.command;
  j["seed"] = m.seed;
  j["config"] = m.config;
  j["started"] = m.started;
  j["finished"] = m.finished;
  j["acceptance"] = m.acceptance;
  j["flags"] = m.flags;
  j["files"] = json::array();
  for (const auto& f : m.files) {
    j["files"].push_back(json{{"path", f.path}, {"role", f.role}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  }
  write_text_file(dir / "manifest.json", j.dump(2) + "\n");
}

RunManifest read_manifest(const fs::path& dir) {
  const fs::path file = dir / "manifest.json";
  json j;
  try {
    j = json::parse(read_text_file(file));
  } catch (const json::exception& e) {
    throw DataError(file.string() + ": " + e.what());
  }
  RunManifest m;
  try {
    m.schema_version = j.at("schema_version").get<int>();
    if (m.schema_version > kSchemaVersion) {
      throw DataError(file.string() + ": schema version " + std::to_string(m.schema_version) +
                      " is newer than the supported version " + std::to_string(kSchemaVersion));
    }
    m.command = j.value("command", "");
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config = j.at("config").get<std::map<std::string, std::string>>();
    m.started = j.at("started").get<std::string>();
    m.finished = j.at("finished").get<std::string>();
    m.acceptance = j.at("acceptance").get<std::map<std::string, std::map<std::string, double>>>();
    m.flags = j.at("flags").get<std::vector<std::string>>();
    for (const auto& f : j.at("files")) {
      m.files.push_back(FileEntry{f.at("path").get<std::string>(), f.at("role").get<std::string>(),
                                  f.at("sha256").get<std::string>(), f.at("bytes").get<std::uintmax_t>()});
    }
  } catch (const json::exception& e) {
    throw DataError(file.string() + ": malformed manifest: " + e.what());
  }
  return m;
}

void verify_manifest(const RunManifest& m, const fs::path& dir) {
  for (const auto& f : m.files) {
    const fs::path p = dir / f.path;
    if (!fs::exists(p)) throw DataError("manifest lists missing file " + p.string());
    const std::string bytes = read_text_file(p);
    if (bytes.size() != f.bytes || sha256_hex(bytes) != f.sha256) {
      throw DataError("checksum mismatch for " + p.string() + " (file is corrupted or was modified)");
    }
  }
}

PosteriorDraws read_draws(const fs::path& dir) {
  const RunManifest m = read_manifest(dir);
  verify_manifest(m, dir);
  const fs::path meta_file = dir / "draws_meta.json";
  json meta;
  try {
    meta = json::parse(read_text_file(meta_file));
  } catch (const json::exception& e) {
    throw DataError(meta_file.string() + ": " + e.what());
  }
  PosteriorDraws d;
  try {
    if (meta.at("schema_version").get<int>() > kSchemaVersion) {
      throw DataError(meta_file.string() + ": schema version is newer than supported");
    }
    d.layout = layout_from_json(meta.at("layout"));
    for (const auto& c : meta.at("chains")) d.chains.push_back(chain_from_json(c));
    d.config_echo = meta.at("config").get<std::map<std::string, std::string>>();
  } catch (const json::exception& e) {
    throw DataError(meta_file.string() + ": malformed metadata: " + e.what());
  }
  const auto names = state_column_names(d.layout);
  for (const auto& f : meta.at("files")) {
    const int chain = f.at("chain").get<int>();
    const std::string rel = f.at("file").get<std::string>();
    std::istringstream in(read_text_file(dir / rel));
    const CsvTable t = read_csv_table(in, rel);
    if (t.header.empty() || t.header[0] != "iteration" ||
        !std::equal(names.begin(), names.end(), t.header.begin() + 1, t.header.end())) {
      throw DataError(rel + ": columns do not match the stored layout");
    }
    std::size_t row = 0;
    for (const auto& r : t.rows) {
      const std::string where = rel + " row " + std::to_string(++row);
      std::vector<double> values;
      values.reserve(names.size());
      for (std::size_t c = 1; c < r.size(); ++c) values.push_back(parse_double(r[c], where));
      d.states.push_back(unflatten_state(values, d.layout));
      d.chain_of.push_back(chain);
      d.iteration_of.push_back(static_cast<int>(parse_integer(r[0], where)));
    }
  }
  return d;
}

std::string config_echo_text(const std::map<std::string, std::string>& config) {
  std::string out;
  for (const auto& [k, v] : config) out += k + " = " + v + "\n";
  return out;
}

}  // namespace jhgp
