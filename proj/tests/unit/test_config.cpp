#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <doctest.h>

#include "hfnerf/config.hpp"

using namespace hfnerf;
namespace fs = std::filesystem;

TEST_SUITE("config") {

TEST_CASE("parsing: trimming, comments, duplicates") {
    const ConfigMap cfg = parse_config_text(
        "# training setup\n"
        "lr = 1e-3\n"
        "  iters=100   \n"
        "\n"
        "lambda_h = 0.25  # heat weight\n"
        "iters = 200\n");
    CHECK(cfg.at("lr") == "1e-3");
    CHECK(cfg.at("lambda_h") == "0.25");
    CHECK(cfg.at("iters") == "200");  // last duplicate wins
    CHECK(cfg.size() == 3);

    CHECK_THROWS_WITH_AS(parse_config_text("lr 1e-3\n"), doctest::Contains("line 1"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config_text("a = 1\n= 2\n"), doctest::Contains("line 2"),
                         std::invalid_argument);
}

TEST_CASE("typed lookups: fallbacks and malformed values") {
    const ConfigMap cfg = parse_config_text("lr = 5e-4\niters = 250\nseed = 12\nbad = 1x\n");
    CHECK(config_double(cfg, "lr", 0.0) == 5e-4);
    CHECK(config_double(cfg, "absent", 7.5) == 7.5);
    CHECK(config_int(cfg, "iters", 0) == 250);
    CHECK(config_int(cfg, "absent", 42) == 42);
    CHECK(config_u64(cfg, "seed", 0) == 12);

    CHECK_THROWS_WITH_AS(config_double(cfg, "bad", 0.0), doctest::Contains("bad"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(config_int(cfg, "lr", 0), doctest::Contains("lr"),
                         std::invalid_argument);
}

TEST_CASE("config maps onto field and train structs with defaults elsewhere") {
    const ConfigMap cfg =
        parse_config_text("trunk_width = 32\nL_x = 4\nlambda_h = 0.75\niters = 123\nseed = 9\n");
    const FieldConfig fc = field_config_from(cfg);
    CHECK(fc.trunk_width == 32);
    CHECK(fc.L_x == 4);
    CHECK(fc.trunk_depth == FieldConfig{}.trunk_depth);
    CHECK(fc.K == 0);  // never from config

    const TrainConfig tc = train_config_from(cfg);
    CHECK(tc.lambda_h == 0.75);
    CHECK(tc.iters == 123);
    CHECK(tc.seed == 9);
    CHECK(tc.lr == TrainConfig{}.lr);
}

TEST_CASE("file loading and the resolved echo") {
    const fs::path path = fs::temp_directory_path() / "hfnerf_cfg_test.cfg";
    std::ofstream(path) << "iters = 77\nlambda_h = 0.5\n";
    const ConfigMap cfg = parse_config_file(path.string());
    CHECK(config_int(cfg, "iters", 0) == 77);
    fs::remove(path);
    CHECK_THROWS_AS(parse_config_file("/nonexistent/x.cfg"), std::runtime_error);

    const std::string text = resolved_config_text(field_config_from(cfg), train_config_from(cfg));
    CHECK(text.find("iters = 77") != std::string::npos);
    CHECK(text.find("lambda_h = 0.5") != std::string::npos);
    CHECK(text.find("trunk_width = 128") != std::string::npos);  // default echoed too
    // Sorted keys: beta1 precedes lr precedes trunk_width.
    CHECK(text.find("beta1") < text.find("lr"));
    CHECK(text.find("lr") < text.find("trunk_width"));
}

}  // TEST_SUITE
