#include <gtest/gtest.h>

#include "dirlat/io.hpp"

using namespace dirlat;
using io::json;

TEST(InstanceJson, RoundTrip) {
  Metric m = generate_random(6, 8, 7, true);
  m.s = 1;
  m.t = 4;
  json j = io::metric_json(m);
  EXPECT_EQ(j.at("n"), 6);
  Metric back = io::metric_from(json::parse(j.dump()));
  EXPECT_EQ(back.dist, m.dist);
  EXPECT_EQ(back.symmetric, true);
  EXPECT_EQ(back.s, std::optional<int>(1));
  EXPECT_EQ(back.t, std::optional<int>(4));
}

TEST(InstanceJson, RationalsAndIntegers) {
  json j = json::parse(R"({"n":2,"symmetric":false,"depot":0,"s":null,"t":null,"dist":[["0","3/2"],["1","0"]]})");
  Metric m = io::metric_from(j);
  EXPECT_EQ(m(0, 1), Rational(3, 2));
  EXPECT_EQ(io::to_json(Rational(3, 2)), "3/2");
  EXPECT_EQ(io::rational_from(json("7")), Rational(7));
}

TEST(InstanceJson, RejectsNonMetrics) {
  auto bad = [](const char* text) { return io::metric_from(json::parse(text)); };
  EXPECT_THROW(bad(R"({"dist":[["0","1"],["1"]]})"), StructuralError);
  EXPECT_THROW(bad(R"({"dist":[["0","-1"],["1","0"]]})"), StructuralError);
  EXPECT_THROW(bad(R"({"dist":[["1","1"],["1","0"]]})"), StructuralError);
  EXPECT_THROW(bad(R"({"dist":[["0","1","5"],["1","0","1"],["1","1","0"]]})"), StructuralError);
  EXPECT_THROW(bad(R"({"symmetric":true,"dist":[["0","1"],["2","0"]]})"), StructuralError);
  EXPECT_THROW(bad(R"({"n":3,"dist":[["0","1"],["1","0"]]})"), StructuralError);
  EXPECT_THROW(bad(R"({"dist":[["0","x"],["1","0"]]})"), StructuralError);
  EXPECT_THROW(bad(R"({"depot":5,"dist":[["0","1"],["1","0"]]})"), StructuralError);
}

TEST(CertificateJson, LatencyFieldsAreExactStrings) {
  Metric m = generate_random(5, 6, 3, false);
  auto res = solve_dirlat(m, {});
  json j = io::latency_json(*res.best, true);
  EXPECT_TRUE(j.at("verified").get<bool>());
  EXPECT_EQ(io::rational_from(j.at("latency")), res.best->latency);
  EXPECT_EQ(j.at("path").get<std::vector<int>>(), res.best->path);
  EXPECT_TRUE(j.at("buckets").is_array());
}

TEST(CertificateJson, RoundingAndRegret) {
  Metric base = generate_random(6, 6, 2, true);
  auto st = solve_atspp_lp(base, 0, 5, Rational(2, 3));
  auto rc = round_path(st, uncross(st, solve_zmin_dual(st)));
  json a = io::rounding_json(rc);
  for (const char* key : {"opt_lp", "path", "path_cost", "ratio", "z_gap", "rho", "k", "ell"}) EXPECT_TRUE(a.contains(key)) << key;
  EXPECT_TRUE(a.at("checks").at("path_bound").get<bool>());
  auto rst = solve_atspp_lp(regret_transform(base, 0), 0, 5, Rational(2, 3));
  auto reg = round_regret(base, rst, delta_opt(Rational(2, 3)));
  json b = io::regret_json(reg);
  for (const char* key : {"delta", "red_ratio_max", "cycle_cost", "branching_q"}) EXPECT_TRUE(b.contains(key)) << key;
  for (auto& [k, v] : b.at("checks").items()) EXPECT_TRUE(v.get<bool>()) << k;
}

TEST(TimeIndexedDump, OnlyNonzeros) {
  Metric m = generate_random(4, 3, 1, false);
  auto model = build_latency_lp(m, default_horizon(m));
  auto sol = solve_latency_lp(model);
  json j = io::time_indexed_json(model, *sol);
  EXPECT_EQ(j.at("T"), model.horizon);
  Rational total;
  for (auto& [k, v] : j.at("x").items()) {
    Rational r = io::rational_from(v);
    EXPECT_GT(r.sign(), 0);
    total += r;
  }
  EXPECT_EQ(total, Rational(3));
}
