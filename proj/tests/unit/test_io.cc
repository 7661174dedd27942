#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "f3a/f3t.h"
#include "f3a/image.h"
#include "f3a/io.h"
#include "json.hpp"

namespace f3a {
namespace {

using nlohmann::json;

// Hand-assembled container: one rank-1 entry "ab" = {1, -2}.
const std::vector<uint8_t> kTinyF3T = {'F', '3', 'T', 'K', 1, 0, 0, 0, 1, 0, 0, 0, 2, 0, 'a', 'b', 1, 2, 0, 0, 0,
                                       0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x00, 0xc0};

TEST(F3TTest, ParsesHandAssembledBytes) {
  const F3TContainer c = F3TContainer::parse(kTinyF3T);
  ASSERT_EQ(c.entries().size(), 1u);
  const Tensor& t = c.at("ab");
  EXPECT_EQ(t.dims, (std::vector<uint32_t>{2}));
  EXPECT_EQ(t.data, (std::vector<float>{1.0f, -2.0f}));
  EXPECT_EQ(c.serialize(), kTinyF3T);
}

TEST(F3TTest, RoundTripManyShapes) {
  F3TContainer c;
  c.add("scalar", Tensor{{}, {3.5f}});
  c.add("grid", Tensor{{2, 3, 4}, std::vector<float>(24, 0.25f)});
  c.add("unicode ключ", Tensor{{0}, {}});
  c.add("late zero", Tensor{{3, 5, 0}, {}});
  std::vector<float> v(100);
  for (size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(i) * -0.125f;
  c.add("vec", Tensor{{100}, v});
  const auto path = std::filesystem::temp_directory_path() / "f3a_io_roundtrip.f3t";
  c.write(path);
  const F3TContainer back = F3TContainer::read(path);
  ASSERT_EQ(back.entries().size(), 5u);
  for (size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(back.entries()[i].first, c.entries()[i].first);
    EXPECT_EQ(back.entries()[i].second.dims, c.entries()[i].second.dims);
    EXPECT_EQ(back.entries()[i].second.data, c.entries()[i].second.data);
  }
  EXPECT_EQ(back.serialize(), c.serialize());
  std::filesystem::remove(path);
}

TEST(F3TTest, RejectsCorruption) {
  for (size_t n = 0; n < kTinyF3T.size(); ++n) {
    std::vector<uint8_t> cut(kTinyF3T.begin(), kTinyF3T.begin() + n);
    EXPECT_THROW(F3TContainer::parse(cut), FormatError) << "prefix " << n;
  }
  auto trailing = kTinyF3T;
  trailing.push_back(0);
  EXPECT_THROW(F3TContainer::parse(trailing), FormatError);
  auto magic = kTinyF3T;
  magic[0] = 'X';
  EXPECT_THROW(F3TContainer::parse(magic), FormatError);
  auto version = kTinyF3T;
  version[4] = 2;
  EXPECT_THROW(F3TContainer::parse(version), FormatError);
  EXPECT_THROW(F3TContainer::read("/nonexistent/f3a.f3t"), FormatError);
}

TEST(F3TTest, AddValidates) {
  F3TContainer c;
  c.add("x", Tensor{{2}, {1, 2}});
  EXPECT_THROW(c.add("x", Tensor{{1}, {1}}), std::invalid_argument);
  EXPECT_THROW(c.add("y", Tensor{{3}, {1}}), std::invalid_argument);
  EXPECT_EQ(c.find("missing"), nullptr);
  EXPECT_THROW(c.at("missing"), FormatError);
}

TEST(ImageTest, PgmBytes) {
  const std::vector<double> v = {0.0, 0.5, 1.0, 2.0, 3.0, 4.0};
  const auto bytes = encode_pgm(2, 3, v);
  const std::string header = "P5\n3 2\n255\n";
  ASSERT_EQ(bytes.size(), header.size() + 6);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + header.size()), header);
  const std::vector<uint8_t> px(bytes.begin() + header.size(), bytes.end());
  EXPECT_EQ(px, (std::vector<uint8_t>{0, 32, 64, 128, 191, 255}));
  const auto flat = encode_pgm(1, 2, std::vector<double>{7.0, 7.0});
  EXPECT_EQ(flat.back(), 0);
  EXPECT_THROW(encode_pgm(2, 2, v), std::invalid_argument);
}

TEST(ImageTest, PpmOverlay) {
  const std::vector<double> v = {0.0, 1.0, 0.5, 0.25};
  const auto bytes = encode_overlay_ppm(2, 2, v, {0, 1});
  const std::string header = "P6\n2 2\n255\n";
  ASSERT_EQ(bytes.size(), header.size() + 12);
  const uint8_t* px = bytes.data() + header.size();
  EXPECT_EQ(px[0], 255);  // red forced on selected token 0
  EXPECT_EQ(px[1], 0);
  EXPECT_EQ(px[2], 0);
  EXPECT_EQ(px[3], 255);
  EXPECT_EQ(px[6], 128);  // unselected gray
  EXPECT_EQ(px[7], 128);
  EXPECT_EQ(px[8], 128);
}

const char* kInstance = R"({
  "grid": {"rows": 2, "cols": 3, "tensor_key": "tokens"},
  "prompt": {"question": "Which one?", "options": [{"letter": "A", "text": "x"}, {"letter": "B", "text": "y"}],
             "task_hint": "counting", "target_phrase": "red cup"},
  "budget": {"ratio": 0.5},
  "method": "score_rank",
  "params": {"heads": 8, "window": 3, "use_rescue": false, "jump_fraction": 0.2}
})";

TEST(InstanceTest, ParsesAllFields) {
  const Instance inst = parse_instance(kInstance);
  EXPECT_EQ(inst.rows, 2);
  EXPECT_EQ(inst.cols, 3);
  EXPECT_EQ(inst.tensor_key, "tokens");
  EXPECT_EQ(inst.prompt.options.size(), 2u);
  EXPECT_EQ(inst.prompt.task_hint, TaskHint::kCounting);
  EXPECT_EQ(inst.prompt.target_phrase, "red cup");
  EXPECT_EQ(inst.ratio, 0.5);
  EXPECT_EQ(inst.method, PrunerKind::kScoreRank);
  EXPECT_EQ(inst.hp.heads, 8);
  EXPECT_EQ(inst.hp.window, 3);
  EXPECT_FALSE(inst.hp.use_rescue);
  EXPECT_EQ(inst.hp.jump_fraction, 0.2);
  EXPECT_EQ(inst.hp.sensing_dim, HyperParams{}.sensing_dim);
}

TEST(InstanceTest, RejectsBadDocuments) {
  auto mutate = [](auto fn) {
    json j = json::parse(kInstance);
    fn(j);
    return j.dump();
  };
  EXPECT_THROW(parse_instance("{"), FormatError);
  EXPECT_THROW(parse_instance("[]"), FormatError);
  EXPECT_THROW(parse_instance(mutate([](json& j) { j["extra"] = 1; })), FormatError);
  EXPECT_THROW(parse_instance(mutate([](json& j) { j.erase("grid"); })), FormatError);
  EXPECT_THROW(parse_instance(mutate([](json& j) { j["budget"]["ratio"] = 0.0; })), FormatError);
  EXPECT_THROW(parse_instance(mutate([](json& j) { j["budget"]["ratio"] = 1.5; })), FormatError);
  EXPECT_THROW(parse_instance(mutate([](json& j) { j["grid"]["rows"] = "2"; })), FormatError);
  EXPECT_THROW(parse_instance(mutate([](json& j) { j["method"] = "oracle"; })), FormatError);
  EXPECT_THROW(parse_instance(mutate([](json& j) { j["prompt"]["task_hint"] = "vibes"; })), FormatError);
  EXPECT_THROW(parse_instance(mutate([](json& j) { j["params"]["bogus"] = 1; })), FormatError);
  EXPECT_THROW(parse_instance(mutate([](json& j) { j["params"]["heads"] = 1.5; })), FormatError);
  EXPECT_THROW(parse_instance(mutate([](json& j) { j["params"]["use_lockon"] = 1; })), FormatError);
}

TEST(InstanceTest, GridFromContainer) {
  const Instance inst = parse_instance(kInstance);
  F3TContainer c3;
  c3.add("tokens", Tensor{{2, 3, 2}, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}});
  const TokenGrid g = grid_from_container(c3, inst);
  EXPECT_EQ(g.dim(), 2);
  EXPECT_EQ(g.token(4)[1], 9.0);
  F3TContainer c2;
  c2.add("tokens", Tensor{{6, 2}, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}});
  EXPECT_EQ(grid_from_container(c2, inst).values(), g.values());
  F3TContainer bad;
  bad.add("tokens", Tensor{{3, 2, 2}, std::vector<float>(12)});
  EXPECT_THROW(grid_from_container(bad, inst), FormatError);
  F3TContainer missing;
  EXPECT_THROW(grid_from_container(missing, inst), FormatError);
}

TEST(BenchConfigTest, ParsesAndRejects) {
  const BenchConfig c = parse_bench_config(R"({"scenarios": ["distributed"], "methods": ["f3a", "score_rank"],
      "ratios": [0.3], "seeds": 4, "first_seed": 10, "rows": 16, "cols": 20, "dim_v": 32, "dim_t": 48,
      "params": {"window": 1}, "sweep": true, "sweep_ratio": 0.5, "ablations": true, "ablation_ratio": 0.3})");
  EXPECT_EQ(c.battery.scenarios, (std::vector<Scenario>{Scenario::kDistributed}));
  EXPECT_EQ(c.battery.methods.size(), 2u);
  EXPECT_EQ(c.battery.seeds, 4);
  EXPECT_EQ(c.battery.first_seed, 10u);
  EXPECT_EQ(c.battery.cols, 20);
  EXPECT_EQ(c.battery.dim_t, 48);
  EXPECT_EQ(c.battery.hp.window, 1);
  EXPECT_TRUE(c.sweep);
  EXPECT_EQ(c.ablation_ratio, 0.3);
  const BenchConfig d = parse_bench_config("{}");
  EXPECT_EQ(d.battery.seeds, 100);
  EXPECT_EQ(d.battery.methods.size(), 5u);
  EXPECT_THROW(parse_bench_config(R"({"seeds": 0})"), FormatError);
  EXPECT_THROW(parse_bench_config(R"({"scenarios": ["x"]})"), FormatError);
  EXPECT_THROW(parse_bench_config(R"({"what": 1})"), FormatError);
}

TEST(OutputTest, SelectionJson) {
  const TokenGrid g(2, 3, 1, std::vector<double>(6, 1.0));
  const json j = json::parse(selection_json(g, {1, 5}, "score_rank", nullptr));
  EXPECT_EQ(j["indices"], json::array({1, 5}));
  EXPECT_EQ(j["coords"], json::parse("[[0,1],[1,2]]"));
  EXPECT_EQ(j["K"], 2);
  EXPECT_EQ(j["method"], "score_rank");
}

TEST(OutputTest, CsvShapes) {
  MetricRow r{"f3a", "single_region", 0.2, 3, 115, 0.5, 0.125, 0.75, 1234};
  const std::string a = metrics_csv({r}, false), b = metrics_csv({r}, true);
  EXPECT_EQ(a.substr(0, a.find('\n')), "scenario,method,rho,seed,k,evidence_recall,distractor_rate,spatial_coverage");
  EXPECT_NE(b.find("runtime_ns"), std::string::npos);
  EXPECT_NE(b.find("1234"), std::string::npos);
  EXPECT_EQ(a.find("1234"), std::string::npos);
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 2);
  EXPECT_EQ(sweep_csv({}).rfind("group,setting,mean_recall,delta", 0), 0u);
  EXPECT_EQ(ablation_csv({}).rfind("variant,scenario,mean_recall,delta", 0), 0u);
}

TEST(CurvesTest, Parse) {
  const auto curves = parse_curves_csv("model,method,rho,accuracy\nm,x,1.0,80\nm,x,0.2,60\nn,y,1.0,1\n");
  ASSERT_EQ(curves.size(), 2u);
  EXPECT_EQ(curves[0].points.front().first, 0.2);
  EXPECT_EQ(curves[1].model, "n");
  EXPECT_THROW(parse_curves_csv("a,b\n"), FormatError);
  EXPECT_THROW(parse_curves_csv("model,method,rho,accuracy\nm,x,abc,1\n"), FormatError);
  EXPECT_THROW(parse_curves_csv("model,method,rho,accuracy\nm,x,0.5\n"), FormatError);
}

TEST(CurvesTest, ReferenceTableLoads) {
  const auto curves = load_curves_csv(std::string(F3A_DATA_DIR) + "/reference_accuracies.csv");
  EXPECT_EQ(curves.size(), 50u);
  for (const auto& c : curves) EXPECT_NO_THROW(c.validate());
}

TEST(OutputTest, PValueFormat) {
  EXPECT_EQ(format_p_value(1.0), "1.0");
  EXPECT_EQ(format_p_value(1.862645149230957e-9), "1.8626e-9");
  EXPECT_EQ(format_p_value(0.5), "5.0000e-1");
  EXPECT_EQ(format_p_value(3.2e-12), "3.2000e-12");
}

}  // namespace
}  // namespace f3a
