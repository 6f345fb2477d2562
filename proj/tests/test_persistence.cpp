#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <unistd.h>

#include "jhgp/errors.hpp"
#include "jhgp/persistence.hpp"
#include "jhgp/sampler.hpp"

using namespace jhgp;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("jhgp_persist_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<SubjectSeries> small_data() {
  std::vector<SubjectSeries> out;
  for (int i = 0; i < 3; ++i) {
    SubjectSeries s;
    s.subject_id = "p" + std::to_string(i);
    for (int k = 1; k <= 5; ++k) {
      s.obs_ticks.push_back(k + i);
      s.y.push_back(0.3 * k - 0.2 * i + 0.1 * ((k * 7 + i) % 3));
      s.event_ticks.push_back(k + i);
      s.r.push_back((k + i) % 4 == 0);
    }
    out.push_back(s);
  }
  return out;
}

SamplerConfig cfg(ModelMode mode) {
  SamplerConfig c;
  c.mode = mode;
  c.iterations = 60;
  c.burn_in = 20;
  c.thin = 4;
  return c;
}

void check_equal(const PosteriorDraws& a, const PosteriorDraws& b) {
  CHECK(a.layout == b.layout);
  REQUIRE(a.size() == b.size());
  for (std::size_t d = 0; d < a.size(); ++d) CHECK(a.states[d] == b.states[d]);
  CHECK(a.chain_of == b.chain_of);
  CHECK(a.iteration_of == b.iteration_of);
  REQUIRE(a.chains.size() == b.chains.size());
  for (std::size_t c = 0; c < a.chains.size(); ++c) CHECK(a.chains[c] == b.chains[c]);
  CHECK(a.config_echo == b.config_echo);
}

}  // namespace

TEST_CASE("sha256 and timestamps") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  ::setenv("SOURCE_DATE_EPOCH", "86400", 1);
  CHECK(timestamp_now() == "1970-01-02T00:00:00Z");
  ::unsetenv("SOURCE_DATE_EPOCH");
  CHECK(timestamp_now().size() == 20);
}

TEST_CASE("config echo is sorted key = value lines") {
  CHECK(config_echo_text({{"b.x", "2"}, {"a.y", "1"}}) == "a.y = 1\nb.x = 2\n");
}

TEST_CASE("draws round-trip exactly in every mode") {
  for (auto mode : {ModelMode::Joint, ModelMode::LongitudinalOnly, ModelMode::SurvivalOnly}) {
    for (bool omega : {false, true}) {
      CAPTURE(to_string(mode));
      CAPTURE(omega);
      SamplerConfig c = cfg(mode);
      c.keep_omega = omega;
      const auto d = run_chain(small_data(), c, 5);
      const fs::path dir = fresh_dir("rt");
      RunManifest m;
      m.command = "fit";
      write_draws(d, dir, m);
      write_manifest(m, dir);
      check_equal(d, read_draws(dir));
      CHECK(m.acceptance.count("chain0") == 1);
      fs::remove_all(dir);
    }
  }
}

TEST_CASE("draw CSV columns are ordered by name, then tick") {
  const auto d = run_chain(small_data(), cfg(ModelMode::Joint), 5);
  const auto names = state_column_names(d.layout);
  // families appear in lexicographic order
  std::string prev_family;
  for (const auto& n : names) {
    const std::string family = n.substr(0, n.find('['));
    if (family != prev_family) {
      CHECK(family > prev_family);
      prev_family = family;
    }
  }
  const fs::path dir = fresh_dir("cols");
  RunManifest m;
  write_draws(d, dir, m);
  std::ifstream in(dir / "draws_chain0.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind("iteration,eta[p0],eta[p1],eta[p2],g_eta,", 0) == 0);
  CHECK(header.find("mu_y[1],mu_y[2],mu_y[3]") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("empty draws give header-only files and a manifest flag") {
  auto d = run_chain(small_data(), cfg(ModelMode::Joint), 5);
  d.states.clear();
  d.chain_of.clear();
  d.iteration_of.clear();
  const fs::path dir = fresh_dir("empty");
  RunManifest m;
  write_draws(d, dir, m);
  write_manifest(m, dir);
  CHECK(std::find(m.flags.begin(), m.flags.end(), "empty_draws") != m.flags.end());
  const std::string text = read_text_file(dir / "draws_chain0.csv");
  CHECK(std::count(text.begin(), text.end(), '\n') == 1);
  const auto back = read_draws(dir);
  CHECK(back.size() == 0);
  CHECK(back.layout == d.layout);
  fs::remove_all(dir);
}

TEST_CASE("two chains give two files plus a merged index") {
  const auto d = run_chains(small_data(), cfg(ModelMode::Joint), 9, 2);
  const fs::path dir = fresh_dir("two");
  RunManifest m;
  write_draws(d, dir, m);
  write_manifest(m, dir);
  CHECK(fs::exists(dir / "draws_chain0.csv"));
  CHECK(fs::exists(dir / "draws_chain1.csv"));
  CHECK(fs::exists(dir / "draws_index.csv"));
  CHECK(fs::exists(dir / "draws_meta.json"));
  const std::string index = read_text_file(dir / "draws_index.csv");
  CHECK(index.rfind("draw,chain,iteration,file,row\n", 0) == 0);
  CHECK(std::count(index.begin(), index.end(), '\n') == static_cast<long>(d.size()) + 1);
  CHECK(m.acceptance.count("chain1") == 1);
  check_equal(d, read_draws(dir));
  fs::remove_all(dir);
}

TEST_CASE("corruption and schema errors") {
  const auto d = run_chain(small_data(), cfg(ModelMode::Joint), 5);
  const fs::path dir = fresh_dir("bad");
  RunManifest m;
  m.seed = 5;
  write_draws(d, dir, m);
  write_manifest(m, dir);

  SUBCASE("checksum mismatch") {
    std::string text = read_text_file(dir / "draws_chain0.csv");
    const auto pos = text.find_last_of("0123456789");
    text[pos] = text[pos] == '1' ? '2' : '1';
    write_text_file(dir / "draws_chain0.csv", text);
    try {
      read_draws(dir);
      FAIL("expected a checksum error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("checksum") != std::string::npos);
    }
  }
  SUBCASE("missing file") {
    fs::remove(dir / "draws_meta.json");
    CHECK_THROWS_AS(read_draws(dir), DataError);
  }
  SUBCASE("newer schema version is refused") {
    std::string text = read_text_file(dir / "manifest.json");
    const std::string key = "\"schema_version\": 1";
    const auto pos = text.find(key);
    REQUIRE(pos != std::string::npos);
    text.replace(pos, key.size(), "\"schema_version\": 2");
    write_text_file(dir / "manifest.json", text);
    try {
      read_manifest(dir);
      FAIL("expected a schema error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("schema") != std::string::npos);
    }
  }
  SUBCASE("malformed manifest") {
    write_text_file(dir / "manifest.json", "{ not json");
    CHECK_THROWS_AS(read_manifest(dir), DataError);
  }
  SUBCASE("manifest round-trip") {
    const auto back = read_manifest(dir);
    CHECK(back.seed == 5);
    CHECK(back.files.size() == m.files.size());
    CHECK(back.acceptance == m.acceptance);
    CHECK_NOTHROW(verify_manifest(back, dir));
  }
  fs::remove_all(dir);
}

TEST_CASE("writing into a missing directory names the path") {
  const auto d = run_chain(small_data(), cfg(ModelMode::Joint), 5);
  RunManifest m;
  try {
    write_draws(d, "/nonexistent/jhgp/dir", m);
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/jhgp/dir") != std::string::npos);
  }
  CHECK_THROWS_AS(write_text_file("/nonexistent/x.txt", "a"), DataError);
}
