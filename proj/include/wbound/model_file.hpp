#pragma once

#include "wbound/aggregation.hpp"
#include "wbound/markov.hpp"
#include "wbound/metric.hpp"

#include <optional>
#include <string>
#include <vector>

namespace wbound {

struct ProductComponent;

/// How a metric was specified, kept so that models serialize back the way
/// they were written.
struct MetricSpec {
  enum class Kind { Discrete, Line, Graph, Explicit, Product };

  Kind kind = Kind::Discrete;
  std::size_t n = 0;               // discrete, graph
  std::vector<double> positions;   // line
  std::vector<WeightedEdge> edges; // graph, 0-based
  Matrix matrix;                   // explicit
  std::vector<ProductComponent> components;

  std::size_t states() const;
};

struct ProductComponent {
  MetricSpec metric;
  double weight = 1.0;
};

Metric build_metric(const MetricSpec& spec);

/// Contents of a model file. Indices are 0-based here and 1-based in JSON.
struct Model {
  std::size_t n = 0;
  std::optional<Generator> generator;
  std::optional<TransitionMatrix> dtmc;
  std::optional<MetricSpec> metric_spec;
  std::optional<Metric> metric;
  std::optional<Partition> partition;
  Alpha alpha;
  std::optional<ProbVec> initial;
  /// Optional second distribution, the default target of `w1`.
  std::optional<ProbVec> target;
  /// Explicit (non-partition) aggregation and its initial distribution.
  std::optional<Aggregation> aggregation;
  std::optional<ProbVec> pi0;

  void set_metric(MetricSpec spec);
  /// Checks cross-references (sizes, alpha against partition).
  void validate() const;
  const Metric& require_metric() const;
  /// The explicit aggregation if present, otherwise the partition-based one
  /// built from `partition` and `alpha`.
  Aggregation build_aggregation() const;
  bool has_aggregation() const noexcept { return aggregation.has_value() || partition.has_value(); }
};

Model load_model_json(const std::string& text);
Model load_model_file(const std::string& path);

/// Canonical JSON: fixed key order, numbers with 17 significant digits.
/// Loading the output and serializing again gives identical bytes.
std::string model_to_json(const Model& model);

/// Distribution specs: `dirac:<i>`, `uniform`, `uniform-block:<b>`,
/// `file:<path>`, `vec:<a>,<b>,...`, and `initial` / `target` for the
/// distributions stored in the model. Indices are 1-based.
ProbVec parse_distribution(const std::string& spec, const Model& model);

/// Parses "1,2;3" into 0-based blocks.
std::vector<std::vector<State>> parse_blocks(const std::string& text);

/// Blocks from JSON text: either a list of blocks or {"partition": [...]}.
std::vector<std::vector<State>> parse_blocks_json(const std::string& text);

}  // namespace wbound
