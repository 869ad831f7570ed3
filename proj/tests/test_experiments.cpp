#include "wwkit/experiments.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace wwkit;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    EXPECT_TRUE(in.good()) << path;
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string tmp_prefix(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() / "wwkit_test";
    std::filesystem::create_directories(dir);
    return (dir / tag).string();
}

}  // namespace

TEST(FitDecay, ExactPowerLaws) {
    std::vector<std::pair<std::int64_t, double>> half, flat, sixth;
    for (std::int64_t n : {16, 32, 64, 128, 256}) {
        half.emplace_back(n, std::pow(static_cast<double>(n), -0.5));
        flat.emplace_back(n, 3.7);
        sixth.emplace_back(n, 2.0 * std::pow(static_cast<double>(n), -1.0 / 6.0));
    }
    DecayFit f = fit_decay(half);
    EXPECT_NEAR(f.slope, 0.5, 1e-12);
    EXPECT_NEAR(f.r2, 1.0, 1e-12);

    DecayFit c = fit_decay(flat);
    EXPECT_NEAR(c.slope, 0.0, 1e-12);
    EXPECT_NEAR(c.r2, 1.0, 1e-12);

    DecayFit s = fit_decay(sixth);
    EXPECT_NEAR(s.slope, 1.0 / 6.0, 1e-12);
    EXPECT_NEAR(s.intercept, std::log(2.0), 1e-12);
}

TEST(FitDecay, NeedsThreePositivePoints) {
    EXPECT_THROW(fit_decay({{16, 1.0}, {32, 0.5}}), std::invalid_argument);
    EXPECT_THROW(fit_decay({{16, 1.0}, {32, 0.0}, {64, -1.0}}), std::invalid_argument);
    EXPECT_NO_THROW(fit_decay({{16, 1.0}, {32, 0.5}, {64, 0.25}, {128, 0.0}}));
}

TEST(FitDecay, SlopeInvariantUnderRescaling) {
    std::vector<std::pair<std::int64_t, double>> base, scaled;
    for (std::int64_t n : {16, 32, 64, 128}) {
        const double v = std::pow(static_cast<double>(n), -0.3) * (1.0 + 0.01 * (n % 3));
        base.emplace_back(n, v);
        scaled.emplace_back(n, 5.0 * v);
    }
    DecayFit a = fit_decay(base);
    DecayFit b = fit_decay(scaled);
    EXPECT_NEAR(a.slope, b.slope, 1e-12);
    EXPECT_NEAR(b.intercept - a.intercept, std::log(5.0), 1e-12);
}

TEST(Seeds, ResolutionPrecedence) {
    EXPECT_EQ(resolve_seed(7, 9, "11"), 7u);   // flag wins
    EXPECT_EQ(resolve_seed(std::nullopt, 9, "11"), 9u);
    EXPECT_EQ(resolve_seed(std::nullopt, std::nullopt, "11"), 11u);
    EXPECT_EQ(resolve_seed(std::nullopt, std::nullopt, nullptr), 12345u);
    EXPECT_THROW(resolve_seed(std::nullopt, std::nullopt, "eleven"), ConfigError);
}

TEST(Config, SchemaErrorsNameTheField) {
    try {
        parse_config(R"({"experiment":"ww-decay","system":{"kind":"bernoulli","probs":[0.5,0.5]},)"
                     R"("observable":{"kind":"centered","index":0},"Ns":[]})");
        FAIL() << "expected schema error";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("Ns"), std::string::npos);
    }
    EXPECT_THROW(parse_config(R"({"experiment":"banana"})"), ConfigError);
    EXPECT_THROW(parse_config("not json"), ConfigError);
    EXPECT_THROW(parse_config(R"({"experiment":"ww-decay","Ns":[64,128,256]})"), ConfigError);
}

TEST(Config, SystemAndObservableParsers) {
    SystemSpec sys = system_from_json(R"({"kind":"skew","dim":3,"angle":"sqrt2-1"})");
    EXPECT_TRUE(sys.is_skew());
    EXPECT_EQ(sys.angle_note, "sqrt2-1");
    ObsPtr f = observable_from_json(R"({"kind":"character","freq":[0,0,1]})", sys);
    EXPECT_EQ(f->kind, ObsKind::TorusCharacter);

    SystemSpec prod_sys = system_from_json(
        R"({"kind":"product","left":{"kind":"rotation","angle":0.3},"right":{"kind":"bernoulli","probs":[0.5,0.5]}})");
    ObsPtr t = observable_from_json(
        R"({"kind":"tensor","left":{"kind":"character","freq":[1]},"right":{"kind":"centered","index":0}})", prod_sys);
    EXPECT_EQ(t->kind, ObsKind::Tensor);

    EXPECT_THROW(observable_from_json(R"({"kind":"widget"})", sys), ConfigError);
}

TEST(Run, WwDecayWritesCsvAndSummary) {
    const std::string prefix = tmp_prefix("decay_small");
    const std::string cfg = R"({"experiment":"ww-decay",
        "system":{"kind":"bernoulli","probs":[0.5,0.5]},
        "observable":{"kind":"centered","index":0},
        "order":2,"Ns":[64,128,256],"samples":8,"seed":77,"threads":1,
        "out":")" + prefix + R"("})";
    RunResult res = run(parse_config(cfg));
    const std::string csv = slurp(res.csv_path);
    EXPECT_NE(csv.find("N,value,certified_upper,stderr"), std::string::npos);
    // every data row carries a strictly positive value
    std::size_t pos = csv.find('\n');
    int rows = 0;
    while (pos != std::string::npos && pos + 1 < csv.size()) {
        std::size_t comma = csv.find(',', pos + 1);
        ASSERT_NE(comma, std::string::npos);
        EXPECT_GT(std::stod(csv.substr(comma + 1)), 0.0);
        ++rows;
        pos = csv.find('\n', pos + 1);
    }
    EXPECT_EQ(rows, 3);
    const std::string json_text = slurp(res.json_path);
    EXPECT_NE(json_text.find("\"fit\""), std::string::npos);
    EXPECT_NE(json_text.find("\"slope\""), std::string::npos);
}

TEST(Run, ByteIdenticalAcrossRerunsAndThreadCounts) {
    const std::string base = R"({"experiment":"ww-decay",
        "system":{"kind":"bernoulli","probs":[0.5,0.5]},
        "observable":{"kind":"centered","index":0},
        "order":2,"Ns":[64,128],"samples":8,"seed":123,)";
    const std::string p1 = tmp_prefix("repro_a");
    const std::string p2 = tmp_prefix("repro_b");
    const std::string p3 = tmp_prefix("repro_c");
    run(parse_config(base + R"("threads":1,"out":")" + p1 + R"("})"));
    run(parse_config(base + R"("threads":1,"out":")" + p2 + R"("})"));
    run(parse_config(base + R"("threads":8,"out":")" + p3 + R"("})"));
    const std::string a = slurp(p1 + ".csv");
    EXPECT_EQ(a, slurp(p2 + ".csv"));
    EXPECT_EQ(a, slurp(p3 + ".csv"));
}

TEST(Run, VdcTrialsAllPass) {
    const std::string prefix = tmp_prefix("vdc_small");
    const std::string cfg = R"({"experiment":"vdc","trials":100,"Nmin":8,"Nmax":128,"seed":5,"out":")" + prefix +
                            R"("})";
    RunResult res = run(parse_config(cfg));
    EXPECT_TRUE(res.ok);
    const std::string json_text = slurp(res.json_path);
    EXPECT_NE(json_text.find("\"pass\": 100"), std::string::npos);
    EXPECT_NE(json_text.find("\"fail\": 0"), std::string::npos);
}

TEST(Run, ClassicalHolderSuite) {
    const std::string prefix = tmp_prefix("classical_small");
    const std::string cfg =
        R"({"experiment":"classical","checks":["holder"],"holder_trials":25,"seed":3,"out":")" + prefix + R"("})";
    RunResult res = run(parse_config(cfg));
    EXPECT_TRUE(res.ok);
}

TEST(Run, SeminormProbeTable) {
    const std::string prefix = tmp_prefix("probe_small");
    const std::string cfg = R"({"experiment":"seminorm",
        "system":{"kind":"rotation","angle":"golden"},
        "observable":{"kind":"character","freq":[1]},
        "order":2,"H":8,"Ns":[16,32],"samples":4,"seed":2,"probe_h_cap":8,
        "out":")" + prefix + R"("})";
    RunResult res = run(parse_config(cfg));
    const std::string csv = slurp(res.csv_path);
    EXPECT_NE(csv.find("N,ww_2b,ww_3b,ww_4b,seminorm_finiteH,stderr"), std::string::npos);
}

TEST(Run, ConfigEchoMakesDefaultsExplicit) {
    ExperimentConfig cfg = parse_config(
        R"({"experiment":"vdc","trials":5,"out":")" + tmp_prefix("echo") + R"("})");
    EXPECT_NE(cfg.source.find("\"oversample\":8"), std::string::npos);
    EXPECT_NE(cfg.source.find("\"seed\""), std::string::npos);
}
