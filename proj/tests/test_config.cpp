#include "orthoplan/config.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>

using namespace orthoplan;

TEST_CASE("toml subset parser") {
    const auto doc = parse_toml(R"(
# top comment
name = "a # not a comment"   # trailing
[orchestrator]
w1 = 0.25
count = 1_000
flag = true
[deep.table]
neg = -3
exp = 1e-3
esc = "q\"t\\n"
)");
    CHECK(std::get<std::string>(doc.at("name")) == "a # not a comment");
    CHECK(std::get<double>(doc.at("orchestrator.w1")) == 0.25);
    CHECK(std::get<std::int64_t>(doc.at("orchestrator.count")) == 1000);
    CHECK(std::get<bool>(doc.at("orchestrator.flag")));
    CHECK(std::get<std::int64_t>(doc.at("deep.table.neg")) == -3);
    CHECK(std::get<double>(doc.at("deep.table.exp")) == 1e-3);
    CHECK(std::get<std::string>(doc.at("deep.table.esc")) == "q\"t\\n");

    CHECK_THROWS_AS(parse_toml("a = [1, 2]"), ConfigError);
    CHECK_THROWS_AS(parse_toml("a = {b = 1}"), ConfigError);
    CHECK_THROWS_AS(parse_toml("a = \"open"), ConfigError);
    CHECK_THROWS_AS(parse_toml("a = 1\na = 2"), ConfigError);
    CHECK_THROWS_AS(parse_toml("[bad table"), ConfigError);
    CHECK_THROWS_AS(parse_toml("[[arr]]"), ConfigError);
    CHECK_THROWS_AS(parse_toml("just words"), ConfigError);
    CHECK_THROWS_AS(parse_toml("a = 12abc"), ConfigError);
}

TEST_CASE("config keys map onto the application settings") {
    const AppConfig cfg = config_from_toml(R"(
[orchestrator]
mode = "sequential"
w1 = 0.3
w2 = 0.7
threshold = 0.45
boosted_w1 = 0.9

[scoring]
over_engineering = 1.25

[staging]
frames_per_aligner = 4
min_aligners = 10
defer_vertical_only = true

[benchmark]
workers = 2
open_bite_fraction = 0.5

[service]
port = 9090
data_dir = "/tmp/x"
)");
    CHECK(cfg.fusion.mode == FusionMode::Sequential);
    CHECK(cfg.fusion.w1 == 0.3);
    CHECK(cfg.fusion.w2 == 0.7);
    CHECK(cfg.fusion.sequential_threshold == 0.45);
    CHECK(cfg.fusion.boosted_w1 == 0.9);
    CHECK(cfg.scoring.over_engineering == 1.25);
    CHECK(cfg.scoring.staging.over_engineering == 1.25);
    CHECK(cfg.scoring.staging.frames_per_aligner == 4);
    CHECK(cfg.scoring.staging.min_aligners == 10);
    CHECK(cfg.scoring.staging.defer_vertical_only);
    CHECK(cfg.benchmark.workers == 2);
    CHECK(cfg.benchmark.synthetic.open_bite_fraction == 0.5);
    CHECK(cfg.service.port == 9090);
    CHECK(cfg.service.data_dir == "/tmp/x");
}

TEST_CASE("defaults") {
    const AppConfig cfg = config_from_toml("");
    CHECK(cfg.fusion.mode == FusionMode::Parallel);
    CHECK(cfg.fusion.w1 == 0.4);
    CHECK(cfg.fusion.w2 == 0.6);
    CHECK(cfg.fusion.sequential_threshold == 0.5);
    CHECK(cfg.fusion.boosted_w1 == 0.8);
    CHECK(cfg.scoring.over_engineering == 1.3);
    CHECK(cfg.service.port == 8080);
}

TEST_CASE("config rejects unknown keys and bad values") {
    CHECK_THROWS_AS(config_from_toml("[orchestrator]\nthreshhold = 0.5"), ConfigError);
    CHECK_THROWS_AS(config_from_toml("[orchestrator]\nmode = \"ensemble\""), ConfigError);
    CHECK_THROWS_AS(config_from_toml("[orchestrator]\nw1 = \"high\""), ConfigError);
    CHECK_THROWS_AS(config_from_toml("[orchestrator]\nw1 = 0.5"), ConfigError);
    CHECK_THROWS_AS(config_from_toml("[staging]\nframes_per_aligner = 0"), ConfigError);
    CHECK_THROWS_AS(config_from_toml("[staging]\nextrusion_start = 1.0"), ConfigError);
    CHECK_THROWS_AS(config_from_toml("[benchmark]\nmild_max_mm = 4.0"), ConfigError);
    CHECK_THROWS_AS(config_from_toml("[service]\nport = 70000"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/orthoplan.toml"), ConfigError);
}

TEST_CASE("config resolution honours the environment") {
    const auto dir = fixtures::temp_dir("config");
    const auto path = (dir / "o.toml").string();
    {
        std::ofstream out(path);
        out << "[service]\nport = 9191\ndata_dir = \"from-file\"\n";
    }
    ::unsetenv("ORTHOPLAN_CONFIG");
    ::unsetenv("ORTHOPLAN_DATA_DIR");
    CHECK(resolve_config("").service.port == 8080);
    CHECK(resolve_config(path).service.data_dir == "from-file");
    ::setenv("ORTHOPLAN_CONFIG", path.c_str(), 1);
    CHECK(resolve_config("").service.port == 9191);
    ::setenv("ORTHOPLAN_DATA_DIR", "/tmp/env-data", 1);
    CHECK(resolve_config("").service.data_dir == "/tmp/env-data");
    ::unsetenv("ORTHOPLAN_CONFIG");
    ::unsetenv("ORTHOPLAN_DATA_DIR");
    std::filesystem::remove_all(dir);
}
