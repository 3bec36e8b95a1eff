#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <vector>

#include "swiftlearn/core.hpp"
#include "swiftlearn/harness.hpp"

using namespace swiftlearn;

namespace {

SamplerConfig good_config() {
  SamplerConfig cfg;
  cfg.keep_ratio = 0.3;
  cfg.temperature = 1.0;
  cfg.warmup_epochs = 2;
  cfg.reeval_interval = std::nullopt;
  cfg.update_policy = UpdatePolicy::Frozen;
  cfg.total_epochs = 10;
  cfg.seed = 7;
  return cfg;
}

std::vector<std::uint64_t> draws(Rng g, int n) {
  std::vector<std::uint64_t> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(g());
  return out;
}

}  // namespace

TEST_CASE("validate_config accepts the reference configuration", "[core]") {
  const SamplerConfig cfg = good_config();
  REQUIRE_FALSE(config_error(cfg).has_value());
  const ValidatedConfig v = validate_config(cfg);
  CHECK(v->keep_ratio == 0.3);
  CHECK(v->total_epochs == 10);
}

TEST_CASE("validate_config accepts boundary values", "[core]") {
  SamplerConfig cfg = good_config();
  cfg.keep_ratio = 1.0;
  cfg.temperature = 0.0;
  cfg.warmup_epochs = 2;
  cfg.total_epochs = 2;  // degenerate: all warm-up
  CHECK_FALSE(config_error(cfg).has_value());

  cfg.keep_ratio = 0.0;
  CHECK_FALSE(config_error(cfg).has_value());
}

TEST_CASE("validate_config names the offending field", "[core]") {
  SamplerConfig cfg = good_config();

  SECTION("warmup_epochs below the two-snapshot minimum") {
    cfg.keep_ratio = 0.5;
    cfg.warmup_epochs = 1;
    const auto err = config_error(cfg);
    REQUIRE(err.has_value());
    CHECK(err->find("warmup_epochs") != std::string::npos);
    CHECK(err->find(">= 2") != std::string::npos);
    CHECK_THROWS_AS(validate_config(cfg), std::invalid_argument);
  }
  SECTION("keep_ratio out of range, value echoed") {
    cfg.keep_ratio = 1.3;
    const auto err = config_error(cfg);
    REQUIRE(err.has_value());
    CHECK(err->find("keep_ratio") != std::string::npos);
    CHECK(err->find("1.3") != std::string::npos);
  }
  SECTION("keep_ratio NaN rejected") {
    cfg.keep_ratio = std::numeric_limits<double>::quiet_NaN();
    REQUIRE(config_error(cfg).has_value());
  }
  SECTION("temperature negative") {
    cfg.temperature = -0.5;
    const auto err = config_error(cfg);
    REQUIRE(err.has_value());
    CHECK(err->find("temperature") != std::string::npos);
  }
  SECTION("warmup exceeding total") {
    cfg.warmup_epochs = 11;
    const auto err = config_error(cfg);
    REQUIRE(err.has_value());
    CHECK(err->find("warmup_epochs") != std::string::npos);
  }
  SECTION("full policy requires an interval") {
    cfg.update_policy = UpdatePolicy::FullEveryK;
    cfg.reeval_interval = std::nullopt;
    const auto err = config_error(cfg);
    REQUIRE(err.has_value());
    CHECK(err->find("reeval_interval") != std::string::npos);
  }
}

TEST_CASE("validate_config is total over adversarial inputs", "[core]") {
  // Every input either validates or produces an error; nothing aborts.
  Rng g = derive_rng(123, "fuzz");
  for (int i = 0; i < 1000; ++i) {
    SamplerConfig cfg;
    cfg.keep_ratio = -2.0 + 4.0 * uniform_unit(g);
    cfg.temperature = -5.0 + 20.0 * uniform_unit(g);
    cfg.warmup_epochs = static_cast<std::uint32_t>(uniform_index(g, 6));
    cfg.total_epochs = static_cast<std::uint32_t>(uniform_index(g, 8));
    cfg.reeval_interval = uniform_unit(g) < 0.5
                              ? std::nullopt
                              : std::optional<std::uint32_t>(
                                    static_cast<std::uint32_t>(uniform_index(g, 4)));
    cfg.update_policy = static_cast<UpdatePolicy>(uniform_index(g, 3));
    const auto err = config_error(cfg);  // must not throw
    if (!err) CHECK_NOTHROW(validate_config(cfg));
  }
}

TEST_CASE("derive_rng determinism and stream independence", "[core]") {
  // Identical (seed, label) pairs give identical streams.
  CHECK(draws(derive_rng(7, "data"), 100) == draws(derive_rng(7, "data"), 100));
  // Distinct labels give different streams.
  CHECK(draws(derive_rng(7, "data"), 100) != draws(derive_rng(7, "select"), 100));
  // Distinct seeds give different streams.
  CHECK(draws(derive_rng(7, "data"), 100) != draws(derive_rng(8, "data"), 100));
}

TEST_CASE("uniform helpers stay in range", "[core]") {
  Rng g = derive_rng(5, "range");
  for (int i = 0; i < 10000; ++i) {
    const double u = uniform_unit(g);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  for (int i = 0; i < 10000; ++i) {
    const auto v = uniform_index(g, 7);
    CHECK(v < 7);
  }
}

TEST_CASE("shuffle_in_place is a seeded permutation", "[core]") {
  std::vector<int> items{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<int> a = items, b = items;
  Rng g1 = derive_rng(11, "shuffle");
  Rng g2 = derive_rng(11, "shuffle");
  shuffle_in_place(a, g1);
  shuffle_in_place(b, g2);
  CHECK(a == b);
  CHECK(std::multiset<int>(a.begin(), a.end()) ==
        std::multiset<int>(items.begin(), items.end()));
}

TEST_CASE("shuffle_stream keys on epoch and id set", "[core]") {
  const std::vector<SampleId> all{0, 1, 2, 3};
  const std::vector<SampleId> subset{0, 2};
  CHECK(draws(shuffle_stream(7, 3, all), 50) == draws(shuffle_stream(7, 3, all), 50));
  CHECK(draws(shuffle_stream(7, 3, all), 50) != draws(shuffle_stream(7, 4, all), 50));
  CHECK(draws(shuffle_stream(7, 3, all), 50) != draws(shuffle_stream(7, 3, subset), 50));
}

TEST_CASE("keep and drop ratios always sum to one exactly", "[core]") {
  // Holds for the CLI conversion (drop flag -> keep) composed with the
  // reported drop_ratio(), across the whole range.
  Rng g = derive_rng(3, "ratios");
  for (int i = 0; i < 2000; ++i) {
    const double drop_in = uniform_unit(g);
    SamplerConfig cfg;
    cfg.keep_ratio = keep_from_drop(drop_in);
    CHECK(cfg.keep_ratio + cfg.drop_ratio() == 1.0);
  }
  for (double keep : {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
    SamplerConfig cfg;
    cfg.keep_ratio = keep;
    CHECK(cfg.keep_ratio + cfg.drop_ratio() == 1.0);
  }
}
