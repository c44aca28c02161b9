#include "doctest.h"

#include "wbound/wbound.h"

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

namespace {

const std::string kData = WBOUND_TEST_DATA;

struct Model {
  wb_model* ptr = nullptr;
  ~Model() { wb_model_free(ptr); }
};

size_t column(const wb_bound_curve* curve, const char* name) {
  for (size_t c = 0; c < wb_bound_curve_columns(curve); ++c) {
    if (std::strcmp(wb_bound_curve_column_name(curve, c), name) == 0) return c;
  }
  FAIL("no column " << name);
  return 0;
}

}  // namespace

TEST_CASE("version and empty error state") {
  CHECK(std::string(wb_version()) == "0.1.0");
  wb_model_free(nullptr);
}

TEST_CASE("worked W1 example through the C interface") {
  Model m;
  REQUIRE(wb_model_builtin_w1_example(&m.ptr) == WB_OK);
  REQUIRE(wb_model_states(m.ptr) == 6);
  std::vector<double> p(6), q(6), gamma(36), f(6);
  REQUIRE(wb_model_distribution(m.ptr, "initial", p.data(), 6) == WB_OK);
  REQUIRE(wb_model_distribution(m.ptr, "target", q.data(), 6) == WB_OK);
  double value = 0.0;
  REQUIRE(wb_w1(m.ptr, p.data(), q.data(), 6, 0, &value, gamma.data(), f.data()) == WB_OK);
  CHECK(value == doctest::Approx(0.975).epsilon(1e-12));
  const double expected_f[] = {2, 0, 1, 2.5, 1, 0};
  for (int i = 0; i < 6; ++i) CHECK(f[i] == doctest::Approx(expected_f[i]).epsilon(1e-12));
  CHECK(gamma[3 * 6 + 5] == doctest::Approx(0.2));

  double generic = 0.0;
  REQUIRE(wb_w1(m.ptr, p.data(), q.data(), 6, WB_W1_GENERIC_LP, &generic, nullptr, nullptr) == WB_OK);
  CHECK(std::abs(generic - value) < 1e-12);

  p[0] += 0.5;
  CHECK(wb_w1(m.ptr, p.data(), q.data(), 6, 0, &value, nullptr, nullptr) == WB_ERR_VALIDATION);
  CHECK(std::string(wb_last_error_name()) == "InvalidDistribution");
  CHECK(wb_w1(m.ptr, q.data(), q.data(), 5, 0, &value, nullptr, nullptr) == WB_ERR_VALIDATION);
  CHECK(std::string(wb_last_error_name()) == "DimensionMismatch");
}

TEST_CASE("toy curvature report") {
  Model m;
  REQUIRE(wb_model_builtin_toy(0, &m.ptr) == WB_OK);
  CHECK(wb_model_kind_of(m.ptr) == WB_KIND_CTMC);
  wb_curvature_options opt;
  wb_curvature_options_init(&opt);
  wb_curvature_report* report = nullptr;
  REQUIRE(wb_curvature(m.ptr, &opt, &report) == WB_OK);
  REQUIRE(wb_curvature_pair_count(report) == 3);
  const double kappa_expected[] = {-6, 2.6, 4.75};
  const double k_expected[] = {-14, 2.6, 4.75};
  for (size_t i = 0; i < 3; ++i) {
    size_t r, s;
    int has_k, has_kappa;
    double k, kappa;
    REQUIRE(wb_curvature_pair(report, i, &r, &s, &has_k, &k, &has_kappa, &kappa) == WB_OK);
    CHECK(has_k);
    CHECK(has_kappa);
    CHECK(k == doctest::Approx(k_expected[i]));
    CHECK(kappa == doctest::Approx(kappa_expected[i]));
  }
  double v = 0.0;
  CHECK(wb_curvature_summary(report, "k_min", &v));
  CHECK(v == doctest::Approx(-14));
  CHECK(wb_curvature_summary(report, "K_global", &v));
  CHECK(v == doctest::Approx(14));
  CHECK(wb_curvature_summary(report, "kappa_min", &v));
  CHECK(v == doctest::Approx(-6));
  CHECK_FALSE(wb_curvature_summary(report, "nonsense", &v));
  size_t n = 0;
  const double* Kloc = wb_curvature_K_local(report, &n);
  REQUIRE(n == 3);
  CHECK(Kloc[0] == doctest::Approx(14));
  CHECK(Kloc[2] == 0.0);
  wb_curvature_report_free(report);

  opt.pairs = WB_PAIRS_ONE;
  opt.r = 1;
  opt.s = 1;
  CHECK(wb_curvature(m.ptr, &opt, &report) == WB_ERR_VALIDATION);
  CHECK(std::string(wb_last_error_name()) == "SamePair");
}

TEST_CASE("toy bounds through the C interface") {
  Model m;
  REQUIRE(wb_model_builtin_toy(0, &m.ptr) == WB_OK);
  wb_bounds_options opt;
  wb_bounds_options_init(&opt);
  opt.T = 1.0;
  opt.grid_points = 11;
  opt.exact = 1;
  opt.variants = "linear,exp_k";
  wb_bound_curve* curve = nullptr;
  REQUIRE(wb_bounds(m.ptr, &opt, &curve) == WB_OK);
  CHECK(wb_bound_curve_rows(curve) == 11);
  CHECK(wb_bound_curve_columns(curve) == 6);
  const size_t t = column(curve, "t"), lin = column(curve, "linear"), expk = column(curve, "exp_k");
  const size_t clipped = column(curve, "linear_clipped"), exact = column(curve, "exact");
  for (size_t i = 0; i < 11; ++i) {
    const double time = wb_bound_curve_value(curve, i, t);
    CHECK(wb_bound_curve_value(curve, i, lin) == doctest::Approx(15 * time));
    CHECK(wb_bound_curve_value(curve, i, clipped) == doctest::Approx(std::min(15 * time, 5.0)));
    CHECK(wb_bound_curve_value(curve, i, expk) == doctest::Approx(std::exp(14 * time) / 14 - 1.0 / 14));
    CHECK(wb_bound_curve_value(curve, i, exact) <= wb_bound_curve_value(curve, i, lin) + 1e-9);
  }
  double W0 = -1;
  CHECK(wb_bound_curve_info(curve, "W0", &W0));
  CHECK(W0 == 0.0);
  wb_bound_curve_free(curve);

  opt.variants = "quadratic";
  CHECK(wb_bounds(m.ptr, &opt, &curve) == WB_ERR_VALIDATION);
}

TEST_CASE("aggregate report") {
  Model m;
  REQUIRE(wb_model_builtin_toy(0, &m.ptr) == WB_OK);
  wb_aggregate_report* report = nullptr;
  REQUIRE(wb_aggregate(m.ptr, &report) == WB_OK);
  CHECK(wb_aggregate_blocks(report) == 2);
  CHECK(wb_aggregate_defect_norm(report) == doctest::Approx(1.0));
  const std::string json = wb_aggregate_json(report);
  CHECK(json.find("\"Theta\"") != std::string::npos);
  CHECK(json.find("\"defect_vector\"") != std::string::npos);
  wb_aggregate_report_free(report);

  REQUIRE(wb_model_set_epsilon_partition(m.ptr, 0.5) == WB_OK);
  REQUIRE(wb_aggregate(m.ptr, &report) == WB_OK);
  CHECK(wb_aggregate_blocks(report) == 3);
  CHECK(wb_aggregate_defect_norm(report) < 1e-12);
  wb_aggregate_report_free(report);

  CHECK(wb_model_set_partition(m.ptr, "1;2") == WB_ERR_VALIDATION);
  CHECK(std::string(wb_last_error_name()) == "InvalidPartition");
  CHECK(wb_model_set_partition_json(m.ptr, "[[1,3],[2]]") == WB_OK);
}

TEST_CASE("loading files and round trips") {
  Model m;
  REQUIRE(wb_model_load_file((kData + "/toy.json").c_str(), &m.ptr) == WB_OK);
  char* text = nullptr;
  REQUIRE(wb_model_to_json(m.ptr, &text) == WB_OK);
  Model again;
  REQUIRE(wb_model_load_json(text, &again.ptr) == WB_OK);
  char* second = nullptr;
  REQUIRE(wb_model_to_json(again.ptr, &second) == WB_OK);
  CHECK(std::string(text) == std::string(second));
  wb_string_free(text);
  wb_string_free(second);

  wb_model* missing = nullptr;
  CHECK(wb_model_load_file((kData + "/missing.json").c_str(), &missing) == WB_ERR_IO);
  CHECK(missing == nullptr);
  CHECK(wb_model_load_file((kData + "/triangle.json").c_str(), &missing) == WB_ERR_VALIDATION);
  CHECK(std::string(wb_last_error_name()) == "TriangleViolation");
  CHECK(std::string(wb_last_error_message()).find("triangle") != std::string::npos);
}

TEST_CASE("grid builtin and discrete-time models") {
  Model grid;
  REQUIRE(wb_model_builtin_grid("0:3,0:3", 2.0, "1,0:0.5;0,-1:0.5", -1, 0.0, &grid.ptr) == WB_OK);
  CHECK(wb_model_states(grid.ptr) == 16);
  wb_curvature_options opt;
  wb_curvature_options_init(&opt);
  opt.pairs = WB_PAIRS_MIN;
  wb_curvature_report* report = nullptr;
  REQUIRE(wb_curvature(grid.ptr, &opt, &report) == WB_OK);
  double kappa = -1;
  CHECK(wb_curvature_summary(report, "kappa_min", &kappa));
  CHECK(kappa >= -1e-7);
  wb_curvature_report_free(report);

  Model dtmc;
  REQUIRE(wb_model_load_file((kData + "/dtmc.json").c_str(), &dtmc.ptr) == WB_OK);
  CHECK(wb_model_kind_of(dtmc.ptr) == WB_KIND_DTMC);
  wb_curvature_options_init(&opt);
  REQUIRE(wb_curvature(dtmc.ptr, &opt, &report) == WB_OK);
  size_t r, s;
  int has_k = 1, has_kappa = 0;
  double k, kap;
  REQUIRE(wb_curvature_pair(report, 0, &r, &s, &has_k, &k, &has_kappa, &kap) == WB_OK);
  CHECK_FALSE(has_k);
  CHECK(has_kappa);
  wb_curvature_report_free(report);

  wb_bounds_options bopt;
  wb_bounds_options_init(&bopt);
  bopt.exact = 1;
  bopt.steps = 10;
  wb_bound_curve* curve = nullptr;
  REQUIRE(wb_bounds(dtmc.ptr, &bopt, &curve) == WB_OK);
  CHECK(wb_bound_curve_rows(curve) == 11);
  const size_t b = column(curve, "bound"), e = column(curve, "exact");
  for (size_t i = 0; i < 11; ++i) CHECK(wb_bound_curve_value(curve, i, b) >= wb_bound_curve_value(curve, i, e) - 1e-9);
  wb_bound_curve_free(curve);
}

TEST_CASE("numerical and internal errors are distinguished") {
  Model m;
  REQUIRE(wb_model_builtin_toy(0, &m.ptr) == WB_OK);
  CHECK(wb_model_set_initial(m.ptr, "dirac:9") == WB_ERR_VALIDATION);
  CHECK(std::string(wb_last_error_name()) == "IndexOutOfRange");
  CHECK(wb_model_set_initial(m.ptr, "dirac:3") == WB_OK);
  CHECK(wb_model_load_json(nullptr, nullptr) == WB_ERR_VALIDATION);
}
