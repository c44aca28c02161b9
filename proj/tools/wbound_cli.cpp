// Command-line front end. Talks to the library only through the C API.

#include "wbound/wbound.h"

#include "CLI11.hpp"

#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct Failure {
  wb_status status;
};

void check(wb_status status) {
  if (status != WB_OK) throw Failure{status};
}

struct ModelOptions {
  std::string file;
  std::string builtin;
  std::string toy_metric = "explicit";
  std::string box = "0:4";
  double rate = 1.0;
  std::string jumps = "1:0.5;-1:0.5";
  long root_state = 0;
  double root_rate = 0.0;
  std::string partition;
  std::string partition_file;
  std::string p0;
};

void add_model_options(CLI::App* app, ModelOptions& o) {
  auto* file = app->add_option("--model", o.file, "model file (JSON)");
  auto* builtin = app->add_option("--builtin", o.builtin, "built-in model")
                      ->check(CLI::IsMember({"toy", "grid", "w1-example"}));
  file->excludes(builtin);
  app->add_option("--toy-metric", o.toy_metric, "metric of the toy model")
      ->check(CLI::IsMember({"explicit", "discrete"}));
  app->add_option("--box", o.box, "grid box, e.g. 0:4,0:4");
  app->add_option("--rate", o.rate, "grid jump rate");
  app->add_option("--jumps", o.jumps, "grid jumps, e.g. 1,0:0.25;-1,0:0.25");
  app->add_option("--root-state", o.root_state, "grid root state (1-based, 0 for none)");
  app->add_option("--root-rate", o.root_rate, "extra rate into the root state");
  app->add_option("--partition", o.partition, "partition, e.g. 1,2;3");
}

struct ModelDeleter {
  void operator()(wb_model* m) const { wb_model_free(m); }
};
using ModelPtr = std::unique_ptr<wb_model, ModelDeleter>;

std::string read_text(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) {
    std::fprintf(stderr, "wbound: IoError: cannot open '%s'\n", path.c_str());
    throw Failure{WB_ERR_IO};
  }
  std::string text;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, f)) > 0) text.append(buf, got);
  std::fclose(f);
  return text;
}

ModelPtr open_model(const ModelOptions& o) {
  wb_model* raw = nullptr;
  if (!o.file.empty()) {
    check(wb_model_load_file(o.file.c_str(), &raw));
  } else if (o.builtin == "toy") {
    check(wb_model_builtin_toy(o.toy_metric == "discrete", &raw));
  } else if (o.builtin == "grid") {
    check(wb_model_builtin_grid(o.box.c_str(), o.rate, o.jumps.c_str(), o.root_state - 1, o.root_rate, &raw));
  } else if (o.builtin == "w1-example") {
    check(wb_model_builtin_w1_example(&raw));
  } else {
    std::fprintf(stderr, "wbound: MissingField: give --model or --builtin\n");
    throw Failure{WB_ERR_VALIDATION};
  }
  ModelPtr model(raw);
  if (!o.partition.empty()) check(wb_model_set_partition(model.get(), o.partition.c_str()));
  if (!o.partition_file.empty()) {
    check(wb_model_set_partition_json(model.get(), read_text(o.partition_file).c_str()));
  }
  return model;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

std::vector<double> distribution(const wb_model* model, const std::string& spec) {
  std::vector<double> out(wb_model_states(model));
  check(wb_model_distribution(model, spec.c_str(), out.data(), out.size()));
  return out;
}

struct W1Options {
  std::string p = "initial";
  std::string q = "target";
  bool coupling = false;
  bool potential = false;
  bool canonical = false;
  bool generic = false;
};

void run_w1(const ModelOptions& mo, const W1Options& o) {
  ModelPtr model = open_model(mo);
  const std::vector<double> p = distribution(model.get(), o.p);
  const std::vector<double> q = distribution(model.get(), o.q);
  const std::size_t n = p.size();
  std::vector<double> gamma(n * n), f(n);
  double value = 0.0;
  check(wb_w1(model.get(), p.data(), q.data(), n, o.generic ? WB_W1_GENERIC_LP : 0u, &value, gamma.data(), f.data()));
  std::printf("value\n%s\n", fmt(value).c_str());
  // The library always returns the canonical coupling, so --canonical needs no extra step.
  if (o.coupling) {
    std::printf("# coupling\nr,s,mass\n");
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t s = 0; s < n; ++s) {
        if (gamma[r * n + s] > 0.0) std::printf("%zu,%zu,%s\n", r + 1, s + 1, fmt(gamma[r * n + s]).c_str());
      }
    }
  }
  if (o.potential) {
    std::printf("# potential\nstate,f\n");
    for (std::size_t s = 0; s < n; ++s) std::printf("%zu,%s\n", s + 1, fmt(f[s]).c_str());
  }
}

struct CurvatureOptions {
  std::string pairs = "all";
  std::optional<double> margin;
  bool k_only = false;
  bool allow_large = false;
};

void run_curvature(const ModelOptions& mo, const CurvatureOptions& o) {
  ModelPtr model = open_model(mo);
  wb_curvature_options opts;
  wb_curvature_options_init(&opts);
  if (o.pairs == "all") {
    opts.pairs = WB_PAIRS_ALL;
  } else if (o.pairs == "min") {
    opts.pairs = WB_PAIRS_MIN;
  } else {
    unsigned long r = 0, s = 0;
    char tail = 0;
    if (std::sscanf(o.pairs.c_str(), "%lu,%lu%c", &r, &s, &tail) != 2 || r == 0 || s == 0) {
      std::fprintf(stderr, "wbound: InvalidArgument: --pairs expects all, min or r,s\n");
      throw Failure{WB_ERR_VALIDATION};
    }
    opts.pairs = WB_PAIRS_ONE;
    opts.r = r - 1;
    opts.s = s - 1;
  }
  if (o.margin) {
    opts.has_margin = 1;
    opts.margin = *o.margin;
  }
  opts.k_only = o.k_only;
  opts.allow_large = o.allow_large;

  wb_curvature_report* raw = nullptr;
  check(wb_curvature(model.get(), &opts, &raw));
  std::unique_ptr<wb_curvature_report, void (*)(wb_curvature_report*)> report(raw, wb_curvature_report_free);

  std::printf("r,s,k,kappa\n");
  for (std::size_t i = 0; i < wb_curvature_pair_count(report.get()); ++i) {
    std::size_t r = 0, s = 0;
    int has_k = 0, has_kappa = 0;
    double k = 0.0, kappa = 0.0;
    check(wb_curvature_pair(report.get(), i, &r, &s, &has_k, &k, &has_kappa, &kappa));
    std::printf("%zu,%zu,%s,%s\n", r + 1, s + 1, has_k ? fmt(k).c_str() : "", has_kappa ? fmt(kappa).c_str() : "");
  }
  std::string summary = "# summary";
  for (const char* key : {"k_min", "kappa_min", "K_global", "threshold", "margin", "solved"}) {
    double v = 0.0;
    if (wb_curvature_summary(report.get(), key, &v)) summary += std::string(" ") + key + "=" + fmt(v);
  }
  std::printf("%s\n", summary.c_str());
}

struct BoundsOptions {
  double T = 1.0;
  std::size_t grid = 200;
  std::string variants;
  bool exact = false;
  std::string p0;
  std::optional<double> margin;
  std::string hybrid_rate = "k";
  std::size_t steps = 20;
};

void run_bounds(const ModelOptions& mo, const BoundsOptions& o) {
  ModelPtr model = open_model(mo);
  wb_bounds_options opts;
  wb_bounds_options_init(&opts);
  opts.T = o.T;
  opts.grid_points = o.grid;
  opts.variants = o.variants.empty() ? nullptr : o.variants.c_str();
  opts.exact = o.exact;
  opts.p0 = o.p0.empty() ? nullptr : o.p0.c_str();
  if (o.margin) {
    opts.has_margin = 1;
    opts.margin = *o.margin;
  }
  opts.hybrid_kappa = o.hybrid_rate == "kappa";
  opts.steps = o.steps;

  wb_bound_curve* raw = nullptr;
  check(wb_bounds(model.get(), &opts, &raw));
  std::unique_ptr<wb_bound_curve, void (*)(wb_bound_curve*)> curve(raw, wb_bound_curve_free);

  std::string meta = "# bounds";
  for (const char* key : {"W0", "defect_norm", "k_min", "kappa_min", "K_global", "d_max"}) {
    double v = 0.0;
    if (wb_bound_curve_info(curve.get(), key, &v)) meta += std::string(" ") + key + "=" + fmt(v);
  }
  std::printf("%s\n", meta.c_str());
  const std::size_t cols = wb_bound_curve_columns(curve.get());
  for (std::size_t c = 0; c < cols; ++c) {
    std::printf("%s%s", c ? "," : "", wb_bound_curve_column_name(curve.get(), c));
  }
  std::printf("\n");
  for (std::size_t r = 0; r < wb_bound_curve_rows(curve.get()); ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      std::printf("%s%s", c ? "," : "", fmt(wb_bound_curve_value(curve.get(), r, c)).c_str());
    }
    std::printf("\n");
  }
}

struct AggregateOptions {
  std::optional<double> eps;
};

void run_aggregate(const ModelOptions& mo, const AggregateOptions& o) {
  ModelPtr model = open_model(mo);
  if (o.eps) check(wb_model_set_epsilon_partition(model.get(), *o.eps));
  wb_aggregate_report* raw = nullptr;
  check(wb_aggregate(model.get(), &raw));
  std::unique_ptr<wb_aggregate_report, void (*)(wb_aggregate_report*)> report(raw, wb_aggregate_report_free);
  std::fputs(wb_aggregate_json(report.get()), stdout);
}

void run_export(const ModelOptions& mo) {
  ModelPtr model = open_model(mo);
  if (!mo.p0.empty()) check(wb_model_set_initial(model.get(), mo.p0.c_str()));
  char* text = nullptr;
  check(wb_model_to_json(model.get(), &text));
  std::fputs(text, stdout);
  wb_string_free(text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein error bounds for aggregated Markov chains"};
  app.require_subcommand(1);

  ModelOptions w1_model, curv_model, bounds_model, agg_model, export_model;
  W1Options w1;
  CurvatureOptions curv;
  BoundsOptions bounds;
  AggregateOptions agg;

  auto* w1_cmd = app.add_subcommand("w1", "Wasserstein distance between two distributions");
  add_model_options(w1_cmd, w1_model);
  w1_cmd->add_option("--p", w1.p, "first distribution spec");
  w1_cmd->add_option("--q", w1.q, "second distribution spec");
  w1_cmd->add_flag("--coupling", w1.coupling, "print the optimal coupling");
  w1_cmd->add_flag("--potential", w1.potential, "print the optimal potential");
  w1_cmd->add_flag("--canonical", w1.canonical, "canonical coupling (always applied)");
  w1_cmd->add_flag("--generic-lp", w1.generic, "solve with the generic simplex");

  auto* curv_cmd = app.add_subcommand("curvature", "coarse Ricci curvature per pair");
  add_model_options(curv_cmd, curv_model);
  curv_cmd->add_option("--pairs", curv.pairs, "all, min, or a pair r,s");
  curv_cmd->add_option("--margin", curv.margin, "candidate margin for --pairs min")->check(CLI::NonNegativeNumber);
  curv_cmd->add_flag("--k-only", curv.k_only, "closed-form lower bounds only");
  curv_cmd->add_flag("--allow-large", curv.allow_large, "exact all-pairs on more than 200 states");

  auto* bounds_cmd = app.add_subcommand("bounds", "error bounds over a time grid");
  add_model_options(bounds_cmd, bounds_model);
  bounds_cmd->add_option("--T", bounds.T, "time horizon");
  bounds_cmd->add_option("--grid", bounds.grid, "number of grid points");
  bounds_cmd->add_option("--variants", bounds.variants, "linear,linear_tv,exp_k,exp_kappa,local,hybrid");
  bounds_cmd->add_flag("--exact", bounds.exact, "also compute the exact error");
  bounds_cmd->add_option("--p0", bounds.p0, "initial distribution spec");
  bounds_cmd->add_option("--margin", bounds.margin, "candidate margin for kappa_min")->check(CLI::NonNegativeNumber);
  bounds_cmd->add_option("--hybrid-rate", bounds.hybrid_rate, "rate used by the hybrid bound")
      ->check(CLI::IsMember({"k", "kappa"}));
  bounds_cmd->add_option("--steps", bounds.steps, "steps for DTMC models");

  auto* agg_cmd = app.add_subcommand("aggregate", "build an aggregation and report its defect");
  add_model_options(agg_cmd, agg_model);
  auto* eps = agg_cmd->add_option("--eps", agg.eps, "greedy metric clustering radius");
  auto* pfile = agg_cmd->add_option("--partition-from-file", agg_model.partition_file, "partition JSON file");
  eps->excludes(pfile);

  auto* export_cmd = app.add_subcommand("model", "print the model in canonical JSON");
  add_model_options(export_cmd, export_model);
  export_cmd->add_option("--p0", export_model.p0, "initial distribution spec to store");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*w1_cmd) run_w1(w1_model, w1);
    if (*curv_cmd) run_curvature(curv_model, curv);
    if (*bounds_cmd) run_bounds(bounds_model, bounds);
    if (*agg_cmd) run_aggregate(agg_model, agg);
    if (*export_cmd) run_export(export_model);
  } catch (const Failure& f) {
    std::fflush(stdout);
    if (*wb_last_error_name()) std::fprintf(stderr, "wbound: %s\n", wb_last_error_message());
    if (f.status == WB_ERR_NUMERICAL) return kExitNumerical;
    if (f.status == WB_ERR_INTERNAL) return 1;
    return kExitValidation;
  }
  return 0;
}
