#include "wbound/wbound.h"

#include "wbound/aggregation.hpp"
#include "wbound/bounds.hpp"
#include "wbound/curvature.hpp"
#include "wbound/error.hpp"
#include "wbound/model_file.hpp"
#include "wbound/models.hpp"
#include "wbound/transport.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <sstream>
#include <string>

using namespace wbound;

struct wb_model {
  Model model;
};

struct wb_curvature_report {
  struct Pair {
    std::size_t r, s;
    bool has_k;
    double k;
    bool has_kappa;
    double kappa;
  };
  std::vector<Pair> pairs;
  std::vector<std::pair<std::string, double>> summary;
  std::vector<double> K_local;
};

struct wb_bound_curve {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  std::vector<std::pair<std::string, double>> info;
};

struct wb_aggregate_report {
  std::size_t blocks = 0;
  double defect_norm = 0.0;
  std::string json;
};

namespace {

thread_local std::string last_name;
thread_local std::string last_message;

wb_status fail(wb_status status, std::string name, std::string message) {
  last_name = std::move(name);
  last_message = std::move(message);
  return status;
}

template <typename F>
wb_status guarded(F&& body) {
  try {
    body();
    return WB_OK;
  } catch (const Error& e) {
    wb_status status = WB_ERR_VALIDATION;
    if (is_numerical(e.code())) status = WB_ERR_NUMERICAL;
    if (e.code() == ErrorCode::IoError) status = WB_ERR_IO;
    return fail(status, error_name(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(WB_ERR_INTERNAL, "OutOfMemory", "allocation failed");
  } catch (const std::exception& e) {
    return fail(WB_ERR_INTERNAL, "Internal", e.what());
  }
}

void require(const void* pointer, const char* what) {
  if (!pointer) throw Error(ErrorCode::InvalidArgument, std::string(what) + " is NULL");
}

char* copy_string(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

wb_status make_model(Model model, wb_model** out) {
  return guarded([&] {
    require(out, "out");
    model.validate();
    *out = new wb_model{std::move(model)};
  });
}

void dense_rows(const Matrix& m, nlohmann::json& target) {
  target = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    target.push_back(row);
  }
}

nlohmann::json vector_json(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

bool lookup(const std::vector<std::pair<std::string, double>>& entries, const char* key, double* value) {
  if (!key) return false;
  for (const auto& [name, v] : entries) {
    if (name == key) {
      if (value) *value = v;
      return true;
    }
  }
  return false;
}

}  // namespace

extern "C" {

const char* wb_last_error_name(void) { return last_name.c_str(); }
const char* wb_last_error_message(void) { return last_message.c_str(); }
const char* wb_version(void) { return "0.1.0"; }

wb_status wb_model_load_file(const char* path, wb_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new wb_model{load_model_file(path)};
  });
}

wb_status wb_model_load_json(const char* text, wb_model** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = new wb_model{load_model_json(text)};
  });
}

wb_status wb_model_builtin_toy(int discrete, wb_model** out) {
  Model model;
  model.n = 3;
  model.generator = toy_ctmc().Q;
  MetricSpec spec;
  if (discrete) {
    spec.kind = MetricSpec::Kind::Discrete;
    spec.n = 3;
  } else {
    spec.kind = MetricSpec::Kind::Explicit;
    spec.matrix = toy_ctmc().metric.distances();
  }
  model.set_metric(std::move(spec));
  model.partition = Partition::from_blocks(3, {{0, 1}, {2}});
  Vector p0(3);
  p0 << 0.5, 0.5, 0.0;
  model.initial = ProbVec::validate(p0);
  return make_model(std::move(model), out);
}

wb_status wb_model_builtin_grid(const char* box, double rate, const char* jumps, long root_state,
                                double root_rate, wb_model** out) {
  return guarded([&] {
    require(box, "box");
    require(jumps, "jumps");
    require(out, "out");
    std::optional<RootLink> root;
    if (root_state >= 0) root = RootLink{static_cast<State>(root_state), root_rate};
    LatticeModel lattice = translation_invariant_ctmc(parse_box(box), rate, parse_jumps(jumps), root);
    Model model;
    model.n = lattice.Q.size();
    model.generator = lattice.Q;
    MetricSpec spec;
    spec.kind = MetricSpec::Kind::Explicit;
    spec.matrix = lattice.metric.distances();
    model.set_metric(std::move(spec));
    *out = new wb_model{std::move(model)};
  });
}

wb_status wb_model_builtin_w1_example(wb_model** out) {
  Model model;
  model.n = 6;
  MetricSpec spec;
  spec.kind = MetricSpec::Kind::Line;
  spec.positions = {0.0, 2.0, 3.0, 4.5, 6.0, 7.0};
  model.set_metric(std::move(spec));
  Vector p(6), q(6);
  p << 0.35, 0.25, 0.05, 0.25, 0.1, 0.0;
  q << 0.2, 0.45, 0.05, 0.0, 0.05, 0.25;
  model.initial = ProbVec::validate(p);
  model.target = ProbVec::validate(q);
  return make_model(std::move(model), out);
}

void wb_model_free(wb_model* model) { delete model; }

size_t wb_model_states(const wb_model* model) { return model ? model->model.n : 0; }

wb_model_kind wb_model_kind_of(const wb_model* model) {
  if (!model) return WB_KIND_NONE;
  if (model->model.generator) return WB_KIND_CTMC;
  if (model->model.dtmc) return WB_KIND_DTMC;
  return WB_KIND_NONE;
}

wb_status wb_model_set_partition(wb_model* model, const char* blocks) {
  return guarded([&] {
    require(model, "model");
    require(blocks, "blocks");
    Model& m = model->model;
    m.partition = Partition::from_blocks(m.n, parse_blocks(blocks));
    m.alpha.reset();
    m.aggregation.reset();
  });
}

wb_status wb_model_set_partition_json(wb_model* model, const char* json) {
  return guarded([&] {
    require(model, "model");
    require(json, "json");
    Model& m = model->model;
    m.partition = Partition::from_blocks(m.n, parse_blocks_json(json));
    m.alpha.reset();
    m.aggregation.reset();
  });
}

wb_status wb_model_set_epsilon_partition(wb_model* model, double eps) {
  return guarded([&] {
    require(model, "model");
    Model& m = model->model;
    m.partition = epsilon_partition(m.require_metric(), eps);
    m.alpha.reset();
    m.aggregation.reset();
  });
}

wb_status wb_model_set_initial(wb_model* model, const char* spec) {
  return guarded([&] {
    require(model, "model");
    require(spec, "spec");
    model->model.initial = parse_distribution(spec, model->model);
  });
}

wb_status wb_model_to_json(const wb_model* model, char** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = copy_string(model_to_json(model->model));
  });
}

void wb_string_free(char* text) { std::free(text); }

wb_status wb_model_distribution(const wb_model* model, const char* spec, double* out, size_t n) {
  return guarded([&] {
    require(model, "model");
    require(spec, "spec");
    require(out, "out");
    const ProbVec p = parse_distribution(spec, model->model);
    if (p.size() != n) {
      throw Error(ErrorCode::DimensionMismatch, "distribution has " + std::to_string(p.size()) +
                                                    " entries, buffer holds " + std::to_string(n));
    }
    for (std::size_t i = 0; i < n; ++i) out[i] = p[i];
  });
}

wb_status wb_w1(const wb_model* model, const double* p, const double* q, size_t n, unsigned flags,
                double* value, double* coupling, double* potential) {
  return guarded([&] {
    require(model, "model");
    require(p, "p");
    require(q, "q");
    require(value, "value");
    const Metric& m = model->model.require_metric();
    if (n != m.size()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "distributions have " + std::to_string(n) + " entries, model has " + std::to_string(m.size()));
    }
    const auto size = static_cast<Eigen::Index>(n);
    const ProbVec P = ProbVec::validate(Eigen::Map<const Vector>(p, size));
    const ProbVec Q = ProbVec::validate(Eigen::Map<const Vector>(q, size));
    const auto method = (flags & WB_W1_GENERIC_LP) ? TransportMethod::GenericLp : TransportMethod::Transportation;
    const Transport t = wasserstein(P, Q, m, method);
    *value = t.value;
    if (coupling) Eigen::Map<Matrix>(coupling, size, size) = t.coupling;
    if (potential) Eigen::Map<Vector>(potential, size) = t.potential;
  });
}

void wb_curvature_options_init(wb_curvature_options* options) {
  if (!options) return;
  *options = wb_curvature_options{};
  options->pairs = WB_PAIRS_ALL;
}

wb_status wb_curvature(const wb_model* model, const wb_curvature_options* options, wb_curvature_report** out) {
  return guarded([&] {
    require(model, "model");
    require(options, "options");
    require(out, "out");
    const Model& mod = model->model;
    const Metric& m = mod.require_metric();
    auto report = std::make_unique<wb_curvature_report>();
    const std::size_t n = mod.n;
    if (n < 2) throw Error(ErrorCode::SingleState, "curvature needs at least two states");
    const std::optional<double> margin =
        options->has_margin ? std::optional<double>(options->margin) : std::nullopt;

    if (options->pairs == WB_PAIRS_ONE) {
      if (options->r >= n || options->s >= n) {
        throw Error(ErrorCode::IndexOutOfRange, "pair outside the state space", {options->r, options->s});
      }
      if (options->r == options->s) throw Error(ErrorCode::SamePair, "pair needs two distinct states");
    }

    if (mod.generator) {
      const Generator& Q = *mod.generator;
      const Matrix k = k_matrix(Q, m);
      const Vector K_loc = K_local_all(Q, m);
      report->K_local.assign(K_loc.data(), K_loc.data() + K_loc.size());
      double lowest = kInfinity;
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t s = r + 1; s < n; ++s) lowest = std::min(lowest, k(r, s));
      }
      report->summary.emplace_back("k_min", lowest);
      report->summary.emplace_back("K_global", K_loc.maxCoeff());

      if (options->pairs == WB_PAIRS_ONE) {
        const std::size_t r = std::min(options->r, options->s), s = std::max(options->r, options->s);
        wb_curvature_report::Pair pair{r, s, true, k(r, s), false, 0.0};
        if (!options->k_only) {
          pair.kappa = kappa_ctmc(Q, m, r, s);
          pair.has_kappa = true;
        }
        report->pairs.push_back(pair);
      } else if (options->pairs == WB_PAIRS_ALL) {
        if (!options->k_only && n > 200 && !options->allow_large) {
          throw Error(ErrorCode::TooManyStates, "all-pairs curvature on " + std::to_string(n) +
                                                    " states needs the explicit large-chain flag");
        }
        double kappa_lowest = kInfinity;
        for (std::size_t r = 0; r < n; ++r) {
          for (std::size_t s = r + 1; s < n; ++s) {
            wb_curvature_report::Pair pair{r, s, true, k(r, s), false, 0.0};
            if (!options->k_only) {
              pair.kappa = kappa_ctmc(Q, m, r, s);
              pair.has_kappa = true;
              kappa_lowest = std::min(kappa_lowest, pair.kappa);
            }
            report->pairs.push_back(pair);
          }
        }
        if (!options->k_only) {
          report->summary.emplace_back("kappa_min", kappa_lowest);
          report->summary.emplace_back("solved", static_cast<double>(report->pairs.size()));
        }
      } else {
        std::vector<std::vector<double>> solved(n, std::vector<double>(n, std::nan("")));
        if (!options->k_only) {
          const KappaMin result = kappa_min(Q, m, margin);
          for (std::size_t i = 0; i < result.solved.size(); ++i) {
            solved[result.solved[i].first][result.solved[i].second] = result.kappa[i];
          }
          report->summary.emplace_back("kappa_min", result.value);
          report->summary.emplace_back("threshold", result.threshold);
          report->summary.emplace_back("margin", result.margin);
          report->summary.emplace_back("solved", static_cast<double>(result.solved.size()));
        }
        for (std::size_t r = 0; r < n; ++r) {
          for (std::size_t s = r + 1; s < n; ++s) {
            const double kappa = solved[r][s];
            report->pairs.push_back({r, s, true, k(r, s), !std::isnan(kappa), std::isnan(kappa) ? 0.0 : kappa});
          }
        }
      }
    } else if (mod.dtmc) {
      const TransitionMatrix& P = *mod.dtmc;
      if (options->pairs == WB_PAIRS_ONE) {
        const std::size_t r = std::min(options->r, options->s), s = std::max(options->r, options->s);
        wb_curvature_report::Pair pair{r, s, false, 0.0, false, 0.0};
        if (!options->k_only) {
          pair.kappa = kappa_dtmc(P, m, r, s);
          pair.has_kappa = true;
        }
        report->pairs.push_back(pair);
      } else {
        if (!options->k_only && n > 200 && !options->allow_large) {
          throw Error(ErrorCode::TooManyStates, "all-pairs curvature on " + std::to_string(n) +
                                                    " states needs the explicit large-chain flag");
        }
        double lowest = kInfinity;
        for (std::size_t r = 0; r < n; ++r) {
          for (std::size_t s = r + 1; s < n; ++s) {
            wb_curvature_report::Pair pair{r, s, false, 0.0, false, 0.0};
            if (!options->k_only) {
              pair.kappa = kappa_dtmc(P, m, r, s);
              pair.has_kappa = true;
              lowest = std::min(lowest, pair.kappa);
            }
            report->pairs.push_back(pair);
          }
        }
        if (!options->k_only) report->summary.emplace_back("kappa_min", lowest);
      }
    } else {
      throw Error(ErrorCode::MissingField, "model has no generator or dtmc");
    }
    *out = report.release();
  });
}

size_t wb_curvature_pair_count(const wb_curvature_report* report) { return report ? report->pairs.size() : 0; }

wb_status wb_curvature_pair(const wb_curvature_report* report, size_t i, size_t* r, size_t* s, int* has_k,
                            double* k, int* has_kappa, double* kappa) {
  return guarded([&] {
    require(report, "report");
    if (i >= report->pairs.size()) throw Error(ErrorCode::IndexOutOfRange, "pair index out of range", {i});
    const auto& pair = report->pairs[i];
    if (r) *r = pair.r;
    if (s) *s = pair.s;
    if (has_k) *has_k = pair.has_k;
    if (k) *k = pair.k;
    if (has_kappa) *has_kappa = pair.has_kappa;
    if (kappa) *kappa = pair.kappa;
  });
}

int wb_curvature_summary(const wb_curvature_report* report, const char* key, double* value) {
  return report && lookup(report->summary, key, value);
}

const double* wb_curvature_K_local(const wb_curvature_report* report, size_t* n) {
  if (!report || report->K_local.empty()) {
    if (n) *n = 0;
    return nullptr;
  }
  if (n) *n = report->K_local.size();
  return report->K_local.data();
}

void wb_curvature_report_free(wb_curvature_report* report) { delete report; }

void wb_bounds_options_init(wb_bounds_options* options) {
  if (!options) return;
  *options = wb_bounds_options{};
  options->T = 1.0;
  options->grid_points = 200;
  options->steps = 20;
}

wb_status wb_bounds(const wb_model* model, const wb_bounds_options* options, wb_bound_curve** out) {
  return guarded([&] {
    require(model, "model");
    require(options, "options");
    require(out, "out");
    const Model& mod = model->model;
    const Metric& m = mod.require_metric();
    if (!mod.has_aggregation()) {
      throw Error(ErrorCode::InvalidAggregation, "model needs a partition or an explicit aggregation");
    }
    ProbVec p0 = options->p0 ? parse_distribution(options->p0, mod)
                 : mod.initial ? *mod.initial
                               : throw Error(ErrorCode::MissingField, "no initial distribution (p0)");
    const Aggregation agg = mod.build_aggregation();
    auto curve = std::make_unique<wb_bound_curve>();

    if (mod.generator) {
      BoundRequest request;
      if (!std::isfinite(options->T)) throw Error(ErrorCode::InvalidArgument, "T must be finite");
      request.grid = uniform_grid(options->T, options->grid_points);
      if (options->variants) {
        request.variants.clear();
        std::istringstream list(options->variants);
        std::string name;
        while (std::getline(list, name, ',')) {
          if (name.empty()) continue;
          const auto v = parse_variant(name);
          if (!v) throw Error(ErrorCode::InvalidArgument, "unknown bound variant '" + name + "'");
          request.variants.push_back(*v);
        }
      }
      request.exact = options->exact != 0;
      if (options->has_margin) request.margin = options->margin;
      request.hybrid_rate = options->hybrid_kappa ? RateChoice::KappaMin : RateChoice::KMin;
      const BoundCurve result = evaluate_bounds(*mod.generator, m, agg, p0, mod.pi0, request);

      curve->names.push_back("t");
      curve->columns.push_back(result.t);
      if (result.exact) {
        curve->names.push_back("exact");
        curve->columns.push_back(*result.exact);
      }
      for (std::size_t i = 0; i < result.variants.size(); ++i) {
        const std::string name = variant_name(result.variants[i]);
        curve->names.push_back(name);
        curve->columns.push_back(result.raw[i]);
        curve->names.push_back(name + "_clipped");
        curve->columns.push_back(result.clipped[i]);
      }
      const BoundInputs& in = result.inputs;
      curve->info = {{"W0", in.W0}, {"defect_norm", in.defect_norm}, {"k_min", in.k_min},
                     {"K_global", in.K_global}, {"d_max", result.d_max}};
      if (in.kappa_min) curve->info.emplace_back("kappa_min", *in.kappa_min);
    } else if (mod.dtmc) {
      const DtmcBoundCurve result =
          evaluate_dtmc_bounds(*mod.dtmc, m, agg, p0, mod.pi0, options->steps, options->exact != 0);
      std::vector<double> steps(result.bound.size());
      for (std::size_t i = 0; i < steps.size(); ++i) steps[i] = static_cast<double>(i);
      curve->names.push_back("k");
      curve->columns.push_back(steps);
      if (result.exact) {
        curve->names.push_back("exact");
        curve->columns.push_back(*result.exact);
      }
      curve->names.push_back("bound");
      curve->columns.push_back(result.bound);
      curve->names.push_back("bound_clipped");
      curve->columns.push_back(result.clipped);
      curve->info = {{"W0", result.W0}, {"defect_norm", result.defect_norm},
                     {"kappa_min", result.kappa_min}, {"d_max", result.d_max}};
    } else {
      throw Error(ErrorCode::MissingField, "model has no generator or dtmc");
    }
    *out = curve.release();
  });
}

size_t wb_bound_curve_rows(const wb_bound_curve* curve) {
  return curve && !curve->columns.empty() ? curve->columns.front().size() : 0;
}

size_t wb_bound_curve_columns(const wb_bound_curve* curve) { return curve ? curve->columns.size() : 0; }

const char* wb_bound_curve_column_name(const wb_bound_curve* curve, size_t column) {
  if (!curve || column >= curve->names.size()) return nullptr;
  return curve->names[column].c_str();
}

double wb_bound_curve_value(const wb_bound_curve* curve, size_t row, size_t column) {
  if (!curve || column >= curve->columns.size() || row >= curve->columns[column].size()) return std::nan("");
  return curve->columns[column][row];
}

int wb_bound_curve_info(const wb_bound_curve* curve, const char* key, double* value) {
  return curve && lookup(curve->info, key, value);
}

void wb_bound_curve_free(wb_bound_curve* curve) { delete curve; }

wb_status wb_aggregate(const wb_model* model, wb_aggregate_report** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    const Model& mod = model->model;
    const Aggregation agg = mod.build_aggregation();
    nlohmann::ordered_json doc;
    if (agg.partition) {
      nlohmann::json blocks = nlohmann::json::array();
      for (const auto& block : agg.partition->blocks()) {
        nlohmann::json b = nlohmann::json::array();
        for (State s : block) b.push_back(s + 1);
        blocks.push_back(b);
      }
      doc["partition"] = blocks;
    }
    nlohmann::json A, L, D;
    dense_rows(agg.A, A);
    doc["A"] = A;
    if (agg.Lambda) {
      dense_rows(*agg.Lambda, L);
      doc["Lambda"] = L;
    }
    dense_rows(agg.dynamics(), D);
    doc[agg.Theta ? "Theta" : "Pi"] = D;
    auto report = std::make_unique<wb_aggregate_report>();
    report->blocks = agg.m;
    if (mod.metric) {
      const Matrix& chain = mod.generator ? mod.generator->rates() : mod.dtmc->probs();
      const Defect d = defect(agg.dynamics(), agg.A, chain, *mod.metric);
      doc["defect_vector"] = vector_json(d.vector);
      doc["defect_norm"] = d.norm;
      report->defect_norm = d.norm;
    }
    std::string text = "{\n";
    std::size_t i = 0;
    for (const auto& [key, value] : doc.items()) {
      text += "  " + nlohmann::json(key).dump() + ": " + value.dump() + (++i < doc.size() ? ",\n" : "\n");
    }
    report->json = text + "}\n";
    *out = report.release();
  });
}

size_t wb_aggregate_blocks(const wb_aggregate_report* report) { return report ? report->blocks : 0; }
double wb_aggregate_defect_norm(const wb_aggregate_report* report) { return report ? report->defect_norm : 0.0; }
const char* wb_aggregate_json(const wb_aggregate_report* report) { return report ? report->json.c_str() : nullptr; }
void wb_aggregate_report_free(wb_aggregate_report* report) { delete report; }

}  // extern "C"
