#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "hwr/config.hpp"

using namespace hwr;

TEST_CASE("defaults validate and every documented key is settable") {
  PipelineConfig cfg;
  cfg.validate();
  std::set<std::string> names;
  for (const auto& k : config_keys()) names.insert(k.name);
  CHECK(names.count("seed"));
  CHECK(names.count("resample.lambda"));
  CHECK(names.count("layout.word_gap"));
  std::istringstream canon(cfg.canonical());
  for (std::string line; std::getline(canon, line);) {
    const auto key = line.substr(0, line.find(" = "));
    CHECK(names.count(key));
  }
}

TEST_CASE("parse, override and reject") {
  PipelineConfig cfg;
  std::istringstream in("# comment\nseed = 9\nresample.lambda = 4.5 # trailing\n\nmatch.midpoints = span\n");
  parse_config(in, cfg);
  CHECK(cfg.seed == 9);
  CHECK(cfg.resample.lambda == 4.5);
  CHECK(cfg.match.midpoints == MidpointSource::Span);
  CHECK_THROWS_AS(cfg.set("no.such.key", "1"), ConfigError);
  CHECK_THROWS_AS(cfg.set("seed", "abc"), ConfigError);
  cfg.set("fit.max_iter", "0");
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("canonical form round trips and the hash ignores output settings") {
  PipelineConfig a;
  a.set("segment.min_prominence", "0.07");
  PipelineConfig b;
  std::istringstream in(a.canonical());
  parse_config(in, b);
  CHECK(b.canonical() == a.canonical());
  CHECK(b.hash() == a.hash());
  b.out = "elsewhere";
  b.verbosity = 2;
  CHECK(b.hash() == a.hash());
  b.set("seed", "2");
  CHECK(b.hash() != a.hash());
  CHECK(repro_header(a).rfind("# hwr ", 0) == 0);
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("frozen recognition config equals the defaults") {
  PipelineConfig frozen;
  load_config(HWR_DATA_DIR "/recognition.conf", frozen);
  CHECK(frozen.canonical() == PipelineConfig{}.canonical());
}
