#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <random>
#include <string>

#include "metric_action_lab/config.hpp"
#include "metric_action_lab/parallel.hpp"

using namespace mal;

TEST(Expression, GrammarAndPrecedence) {
  EXPECT_EQ(Expression::parse("1/h")(4.0), 0.25);
  EXPECT_EQ(Expression::parse("2 + 3 * h")(2.0), 8.0);
  EXPECT_EQ(Expression::parse("(2 + 3) * h")(2.0), 10.0);
  EXPECT_EQ(Expression::parse("-h - -2")(1.0), 1.0);
  EXPECT_EQ(Expression::parse("8 / 4 / 2")(0.0), 1.0);
  EXPECT_EQ(Expression::parse("10 - 3 - 2")(0.0), 5.0);
  EXPECT_DOUBLE_EQ(Expression::parse("pow(h, -1.5)")(4.0), 0.125);
  EXPECT_DOUBLE_EQ(Expression::parse("sqrt(h) * exp(0)")(9.0), 3.0);
  EXPECT_DOUBLE_EQ(Expression::parse("pow(4, -h)")(2.0), 1.0 / 16.0);
  EXPECT_DOUBLE_EQ(Expression::parse("1e-3 * h")(2.0), 2e-3);
  EXPECT_EQ(Expression::parse("  h  ").text(), "  h  ");
}

TEST(Expression, MultipleVariables) {
  const Expression e = Expression::parse("h * d + 1", {"h", "d"});
  EXPECT_EQ(e({{"h", 2.0}, {"d", 3.0}}), 7.0);
  EXPECT_THROW(e({{"h", 2.0}}), ConfigError);
}

TEST(Expression, Constant) {
  const Expression c = Expression::constant(0.1);
  EXPECT_EQ(c(123.0), 0.1);
  EXPECT_EQ(c.text(), "0.1");
}

TEST(Expression, RejectsMalformedInput) {
  for (const char* bad : {"", "1 +", "h h", "(h", "h)", "sin(h)", "x", "pow(h)", "pow(1, 2, 3)", "2 ** h", "1/h;",
                          "sqrt h", "3..2", "import os"}) {
    EXPECT_THROW(Expression::parse(bad), ConfigError) << bad;
  }
  EXPECT_THROW(Expression::parse("d", {"h"}), ConfigError);
}

TEST(Expression, EvaluationWithoutVariablesFailsOnlyWhenUsed) {
  EXPECT_EQ(Expression::parse("2 * 3")(Expression::Variables{}), 6.0);
  EXPECT_THROW(Expression::parse("h")(Expression::Variables{}), ConfigError);
}

TEST(Numbers, ShortestRoundTrip) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    EXPECT_EQ(parse_number(format_number(v)), v);
  }
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1.0), "1");
  EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_number(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  EXPECT_TRUE(std::isinf(parse_number("inf")));
  EXPECT_TRUE(std::isnan(parse_number("nan")));
}

TEST(Numbers, ParseRejectsGarbage) {
  for (const char* bad : {"", "abc", "1.0x", "1,0", " 1"}) EXPECT_THROW(parse_number(bad), IoError) << bad;
}

TEST(Numbers, JsonEncodesNonFiniteAsStrings) {
  EXPECT_EQ(json_number(2.5), Json(2.5));
  EXPECT_EQ(json_number(std::numeric_limits<double>::infinity()), Json("inf"));
  EXPECT_EQ(json_number(ExtendedReal::infinity()), Json("inf"));
}

TEST(Points, JsonRoundTripOnEverySpace) {
  const std::vector<std::pair<Space, Point>> cases{{Space::euclidean(3), Point::euclidean({1, -2, 0.5})},
                                                   {Space::half_line(), Point::half_line(0.25)},
                                                   {Space::tripod(3, 1.0), Point::tripod(1, 0.75)},
                                                   {Space::quantile(4), Point::quantile({-1, 0, 0, 2})}};
  for (const auto& [s, p] : cases) {
    const Point q = point_from_json(s, point_to_json(p));
    EXPECT_EQ(distance(s, p, q), 0.0) << s.describe();
  }
}

TEST(Points, TaggedPointInWrongSpace) {
  const Json j = point_to_json(Point::half_line(1.0));
  EXPECT_THROW(point_from_json(Space::euclidean(1), j), TagError);
  EXPECT_THROW(point_from_config(Space::euclidean(1), j), TagError);
}

TEST(Points, ExpressionsInCoordinates) {
  const Json j = Json::parse(R"({"coords": ["1/h", 2]})");
  const Point p = point_from_config(Space::euclidean(2), j, 4.0);
  EXPECT_EQ(p.coords, (std::vector<double>{0.25, 2.0}));
  EXPECT_EQ(point_from_config(Space::half_line(), Json(3.0)).x(), 3.0);
}

TEST(Points, InvalidCoordinatesRejected) {
  EXPECT_THROW(point_from_config(Space::half_line(), Json(-1.0)), DomainError);
  EXPECT_THROW(point_from_coords(Space::half_line(), {1.0, 2.0}), IoError);
  EXPECT_THROW(point_from_coords(Space::tripod(3, 1.0), {1.0}), IoError);
  EXPECT_THROW(point_from_config(Space::quantile(3), Json::parse("[2, 1, 0]")), DomainError);
}

TEST(Curves, CsvRoundTripIsExact) {
  const std::vector<std::pair<Space, std::pair<Point, Point>>> cases{
      {Space::euclidean(2), {Point::euclidean({0, 0}), Point::euclidean({1.0 / 3, 2})}},
      {Space::half_line(), {Point::half_line(0.1), Point::half_line(0.7)}},
      {Space::tripod(3, 1.0), {Point::tripod(0, 0.5), Point::tripod(2, 0.3)}},
      {Space::quantile(3), {Point::quantile({0, 1, 2}), Point::quantile({-1, -1, 5})}}};
  for (const auto& [s, ends] : cases) {
    const SampledCurve c = SampledCurve::geodesic(s, ends.first, ends.second, 17);
    const std::string csv = curve_to_csv(c);
    const SampledCurve back = curve_from_csv(s, csv);
    ASSERT_EQ(back.size(), c.size());
    for (std::size_t k = 0; k < c.size(); ++k) {
      EXPECT_EQ(back.times()[k], c.times()[k]);
      EXPECT_EQ(distance(s, back.points()[k], c.points()[k]), 0.0);
    }
    EXPECT_EQ(curve_to_csv(back), csv);
  }
}

TEST(Curves, CsvHeaders) {
  EXPECT_EQ(curve_csv_header(Space::euclidean(2)), "t,coord_0,coord_1");
  EXPECT_EQ(curve_csv_header(Space::tripod(3, 1.0)), "t,edge,offset");
  EXPECT_EQ(curve_csv_header(Space::half_line()), "t,coord_0");
}

TEST(Curves, CsvErrors) {
  const Space e = Space::euclidean(1);
  EXPECT_THROW(curve_from_csv(e, ""), IoError);
  EXPECT_THROW(curve_from_csv(e, "t,x\n0,1\n"), IoError);
  EXPECT_THROW(curve_from_csv(e, "t,coord_0\n0,1,2\n"), IoError);
  EXPECT_THROW(curve_from_csv(e, "t,coord_0\n0,one\n"), IoError);
  EXPECT_NO_THROW(curve_from_csv(e, "t,coord_0\r\n0,1\r\n1,2\r\n"));
}

TEST(Files, WriteAndReadBack) {
  const auto dir = std::filesystem::temp_directory_path() / "mal_config_test";
  std::filesystem::remove_all(dir);
  write_file(dir / "nested" / "a.txt", "hello\n");
  EXPECT_EQ(read_file(dir / "nested" / "a.txt"), "hello\n");
  write_json(dir / "b.json", Json{{"k", 1}});
  EXPECT_EQ(Json::parse(read_file(dir / "b.json"))["k"], 1);
  EXPECT_THROW(read_file(dir / "missing.txt"), IoError);
  std::filesystem::remove_all(dir);
}

TEST(Config, Schema) {
  EXPECT_NO_THROW(require_schema(Json::parse(R"({"schema": 1})")));
  EXPECT_NO_THROW(require_schema(Json::object()));
  EXPECT_THROW(require_schema(Json::parse(R"({"schema": 2})")), ConfigError);
}

TEST(Config, Params) {
  EXPECT_EQ(param(Json(2.0), {}), 2.0);
  EXPECT_EQ(param(Json("1/h"), 8.0), 0.125);
  EXPECT_THROW(param(Json("1/h"), std::nullopt), ConfigError);
  EXPECT_THROW(param(Json::array(), {}), ConfigError);
  EXPECT_EQ(param_or(Json::object(), "eps", 0.5), 0.5);
  EXPECT_EQ(param_vector(Json(1.0), {}), std::vector<double>{1.0});
}

TEST(Config, SpacesRoundTrip) {
  for (const Space& s : {Space::euclidean(3), Space::half_line(), Space::tripod({1.0, 2.0, 0.5}), Space::quantile(5)}) {
    const Space t = space_from_json(space_to_json(s));
    EXPECT_EQ(t.describe(), s.describe());
  }
  EXPECT_EQ(space_from_json(Json::parse(R"({"kind": "tripod", "count": 4, "length": 2})")).edge_lengths().size(), 4u);
  EXPECT_ANY_THROW(space_from_json(Json::parse(R"({"kind": "torus"})")));
}

TEST(Config, Functionals) {
  const Space hl = Space::half_line();
  const FunctionalSpec e1 = functional_from_json(hl, Json::parse(R"({"name": "example1", "eps": 0.01})"));
  EXPECT_EQ(e1.evaluate(Point::half_line(2.0)).value(), 0.0025);
  const FunctionalSpec e2 = functional_from_json(hl, Json::parse(R"({"name": "example2", "h": "h"})"), 4.0);
  EXPECT_NEAR(e2.evaluate(Point::half_line(0.0)).value(), 1.0, 1e-12);
  const Space e = Space::euclidean(1);
  const FunctionalSpec q =
      functional_from_json(e, Json::parse(R"({"name": "quadratic", "center": [1], "lambda": 2, "scale": 3})"));
  EXPECT_DOUBLE_EQ(q.evaluate(Point::euclidean({0.0})).value(), 3.0);
  EXPECT_DOUBLE_EQ(q.lambda, 6.0);
  EXPECT_THROW(functional_from_json(e, Json::parse(R"({"name": "example1"})")), ConfigError);
  EXPECT_THROW(functional_from_json(e, Json::parse(R"({"name": "example2", "h": 1})")), ConfigError);
  EXPECT_THROW(functional_from_json(e, Json::parse(R"({"name": "mystery"})")), ConfigError);
}

TEST(Config, FamilyMembersDependOnH) {
  const Space hl = Space::half_line();
  const FunctionalFamily fam = family_from_json(
      hl, Json::parse(R"({"member": {"name": "example1", "eps": "1/h"}, "limit": {"name": "example1", "eps": 0}})"));
  EXPECT_DOUBLE_EQ(fam.member(4.0).evaluate(Point::half_line(1.0)).value(), 0.25);
  EXPECT_DOUBLE_EQ(fam.limit.evaluate(Point::half_line(1.0)).value(), 0.0);
}

TEST(Config, HList) {
  EXPECT_EQ(h_list_from_json(Json::parse("[1, 2, 4]")), (std::vector<double>{1, 2, 4}));
  EXPECT_TRUE(h_list_from_json(Json::array()).empty());
  EXPECT_THROW(h_list_from_json(Json::parse("[1, 4, 2]")), ConfigError);
  EXPECT_THROW(h_list_from_json(Json::parse("[1, 1]")), ConfigError);
}

TEST(Config, DiscretizationOverrides) {
  const Discretization d = discretization_from_json(Json::parse(R"({"curve_nodes": 64, "margin": 0.1})"));
  EXPECT_EQ(d.curve_nodes, 64u);
  EXPECT_EQ(d.margin, 0.1);
  EXPECT_EQ(d.certificate_cells, Discretization{}.certificate_cells);
  EXPECT_EQ(discretization_from_json(Json()).sup_samples, Discretization{}.sup_samples);
}

TEST(Config, CurveKinds) {
  const Space e = Space::euclidean(1);
  const SampledCurve g = curve_from_config(e, Json::parse(R"({"from": [0], "to": [1], "N": 8})"), zero_functional());
  EXPECT_EQ(g.size(), 9u);
  EXPECT_THROW(curve_from_config(e, Json::parse(R"({"kind": "spline", "from": [0], "to": [1]})"), zero_functional()),
               ConfigError);
  const auto dir = std::filesystem::temp_directory_path() / "mal_curve_kind";
  write_file(dir / "c.csv", curve_to_csv(g));
  const SampledCurve c =
      curve_from_config(e, Json::parse(R"({"kind": "csv", "path": "c.csv"})"), zero_functional(), dir);
  EXPECT_EQ(c.size(), g.size());
  std::filesystem::remove_all(dir);
}

TEST(Config, RecoverySettings) {
  const Space hl = Space::half_line();
  const SampledCurve g = SampledCurve::geodesic(hl, Point::half_line(1), Point::half_line(2), 8);
  const RecoveryConfig cfg = recovery_from_json(
      hl, Json::parse(R"j({"mode": "vanishing", "eps": "pow(4, -h)", "tau": "d / h", "x0h": "1 + 1/h"})j"), g);
  EXPECT_EQ(cfg.mode, RecoveryMode::Vanishing);
  EXPECT_DOUBLE_EQ(cfg.eps(1.0), 0.25);
  EXPECT_DOUBLE_EQ(cfg.tau_schedule(4.0, 2.0), 0.5);
  EXPECT_DOUBLE_EQ(cfg.x0h(2.0).x(), 1.5);
  const RecoveryConfig numeric = recovery_from_json(hl, Json::parse(R"({"tau": 0.125})"), g);
  EXPECT_EQ(numeric.tau_schedule(1.0, 1.0), 0.125);
  EXPECT_ANY_THROW(recovery_from_json(hl, Json::parse(R"({"mode": "teleport"})"), g));
  EXPECT_THROW(recovery_from_json(hl, Json::parse(R"({"tau": "q"})"), g), ConfigError);
}

TEST(Threads, EnvironmentCapsRequests) {
  ::setenv("METRIC_ACTION_LAB_THREADS", "2", 1);
  EXPECT_EQ(resolve_threads(8), 2u);
  EXPECT_EQ(resolve_threads(0), 2u);
  EXPECT_EQ(resolve_threads(1), 1u);
  ::setenv("METRIC_ACTION_LAB_THREADS", "junk", 1);
  EXPECT_EQ(resolve_threads(3), 3u);
  ::unsetenv("METRIC_ACTION_LAB_THREADS");
  EXPECT_GE(resolve_threads(0), 1u);
  EXPECT_EQ(resolve_threads(5), 5u);
}

TEST(Threads, ParallelMapIsOrderedAndRethrowsFirstError) {
  const auto v = parallel_map<int>(100, [](std::size_t i) { return static_cast<int>(i * i); }, 4);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], static_cast<int>(i * i));
  EXPECT_TRUE(parallel_map<int>(0, [](std::size_t) { return 0; }, 4).empty());
  try {
    parallel_map<int>(
        20,
        [](std::size_t i) -> int {
          if (i == 3 || i == 17) throw DomainError("fail " + std::to_string(i));
          return 0;
        },
        4);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_STREQ(e.what(), "fail 3");
  }
}
