#include "wbound/model_file.hpp"

#include "wbound/error.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace wbound {

using nlohmann::json;

std::size_t MetricSpec::states() const {
  switch (kind) {
    case Kind::Discrete:
    case Kind::Graph: return n;
    case Kind::Line: return positions.size();
    case Kind::Explicit: return static_cast<std::size_t>(matrix.rows());
    case Kind::Product: {
      std::size_t total = components.empty() ? 0 : 1;
      for (const auto& c : components) total *= c.metric.states();
      return total;
    }
  }
  return 0;
}

Metric build_metric(const MetricSpec& spec) {
  switch (spec.kind) {
    case MetricSpec::Kind::Discrete: return discrete_metric(spec.n);
    case MetricSpec::Kind::Line: return line_metric(spec.positions);
    case MetricSpec::Kind::Graph: return shortest_path_metric(spec.n, spec.edges);
    case MetricSpec::Kind::Explicit: return Metric::validate(spec.matrix);
    case MetricSpec::Kind::Product: {
      std::vector<WeightedMetric> parts;
      for (const auto& c : spec.components) parts.push_back({build_metric(c.metric), c.weight});
      return product_metric(parts);
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown metric kind");
}

void Model::set_metric(MetricSpec spec) {
  metric = build_metric(spec);
  metric_spec = std::move(spec);
}

const Metric& Model::require_metric() const {
  if (!metric) throw Error(ErrorCode::MissingField, "model has no metric");
  return *metric;
}

void Model::validate() const {
  auto check = [this](std::size_t size, const char* what) {
    if (size != n) {
      throw Error(ErrorCode::DimensionMismatch, std::string(what) + " has " + std::to_string(size) +
                                                    " states, model has " + std::to_string(n));
    }
  };
  if (generator && dtmc) throw Error(ErrorCode::InvalidArgument, "model has both a generator and a dtmc");
  if (generator) check(generator->size(), "generator");
  if (dtmc) check(dtmc->size(), "dtmc");
  if (metric) check(metric->size(), "metric");
  if (partition) check(partition->size(), "partition");
  if (initial) check(initial->size(), "initial distribution");
  if (target) check(target->size(), "target distribution");
  if (alpha && !partition) throw Error(ErrorCode::BadAlpha, "alpha given without a partition");
  if (partition && alpha) disaggregation_matrix(*partition, alpha);
  if (aggregation) {
    check(aggregation->n, "aggregation matrix A");
    if (aggregation->Theta && !generator) throw Error(ErrorCode::InvalidAggregation, "Theta needs a generator model");
    if (aggregation->Pi && !dtmc) throw Error(ErrorCode::InvalidAggregation, "Pi needs a dtmc model");
    if (pi0 && pi0->size() != aggregation->m) {
      throw Error(ErrorCode::DimensionMismatch, "pi0 does not match the aggregation");
    }
  }
}

Aggregation Model::build_aggregation() const {
  if (aggregation) return *aggregation;
  if (!partition) throw Error(ErrorCode::InvalidAggregation, "model has neither a partition nor an aggregation");
  if (generator) return partition_aggregation_ctmc(*generator, *partition, alpha);
  if (dtmc) return partition_aggregation_dtmc(*dtmc, *partition, alpha);
  throw Error(ErrorCode::MissingField, "model has no generator or dtmc");
}

namespace {

const json& field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::MissingField, std::string("missing field '") + key + "'");
  return *it;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw Error(ErrorCode::ParseError, where + ": expected a number");
  return j.get<double>();
}

std::size_t index1(const json& j, std::size_t n, const std::string& where) {
  if (!j.is_number_integer() && !(j.is_number() && std::floor(j.get<double>()) == j.get<double>())) {
    throw Error(ErrorCode::ParseError, where + ": expected an integer state index");
  }
  const auto value = j.get<long long>();
  if (value < 1 || (n > 0 && static_cast<std::size_t>(value) > n)) {
    throw Error(ErrorCode::IndexOutOfRange, where + ": state " + std::to_string(value) + " outside 1.." +
                                                std::to_string(n));
  }
  return static_cast<std::size_t>(value - 1);
}

Vector vector_of(const json& j, const std::string& where) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, where + ": expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], where);
  return v;
}

Matrix matrix_of(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::ParseError, where + ": expected a non-empty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw Error(ErrorCode::ParseError, where + ": rows of unequal length");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number(j[r][c], where);
    }
  }
  return m;
}

std::vector<RateEntry> triplets_of(const json& j, std::size_t n, const std::string& where) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, where + ": expected an array of [r, s, value]");
  std::vector<RateEntry> entries;
  for (const auto& t : j) {
    if (!t.is_array() || t.size() != 3) throw Error(ErrorCode::ParseError, where + ": expected [r, s, value]");
    entries.push_back({index1(t[0], n, where), index1(t[1], n, where), number(t[2], where)});
  }
  return entries;
}

template <typename Chain>
Chain chain_of(const json& j, std::size_t n, const std::string& where) {
  if (j.is_array()) return Chain::validate(matrix_of(j, where));
  if (!j.is_object()) throw Error(ErrorCode::ParseError, where + ": expected an object");
  if (j.contains("rows")) return Chain::validate(matrix_of(j["rows"], where));
  if (j.contains("triplets")) {
    if (n == 0) throw Error(ErrorCode::MissingField, where + ": triplets need the model size 'n'");
    return Chain::from_triplets(n, triplets_of(j["triplets"], n, where));
  }
  throw Error(ErrorCode::MissingField, where + ": needs 'rows' or 'triplets'");
}

MetricSpec metric_of(const json& j, std::size_t n) {
  MetricSpec spec;
  const std::string kind = j.is_string() ? j.get<std::string>()
                           : j.is_object() && j.contains("kind") && j["kind"].is_string()
                               ? j["kind"].get<std::string>()
                               : throw Error(ErrorCode::ParseError, "metric: expected a kind");
  auto size = [&]() -> std::size_t {
    if (j.is_object() && j.contains("n")) return index1(j["n"], 0, "metric.n") + 1;
    if (n == 0) throw Error(ErrorCode::MissingField, "metric: size unknown, give 'n'");
    return n;
  };
  if (kind == "discrete") {
    spec.kind = MetricSpec::Kind::Discrete;
    spec.n = size();
  } else if (kind == "line") {
    spec.kind = MetricSpec::Kind::Line;
    const Vector p = vector_of(field(j, "positions"), "metric.positions");
    spec.positions.assign(p.data(), p.data() + p.size());
  } else if (kind == "graph") {
    spec.kind = MetricSpec::Kind::Graph;
    spec.n = size();
    for (const auto& e : field(j, "edges")) {
      if (!e.is_array() || e.size() != 3) throw Error(ErrorCode::ParseError, "metric.edges: expected [r, s, w]");
      spec.edges.push_back({index1(e[0], spec.n, "metric.edges"), index1(e[1], spec.n, "metric.edges"),
                            number(e[2], "metric.edges")});
    }
  } else if (kind == "explicit") {
    spec.kind = MetricSpec::Kind::Explicit;
    spec.matrix = matrix_of(field(j, "matrix"), "metric.matrix");
  } else if (kind == "product") {
    spec.kind = MetricSpec::Kind::Product;
    for (const auto& c : field(j, "components")) {
      ProductComponent component;
      component.metric = metric_of(field(c, "metric"), 0);
      component.weight = number(field(c, "weight"), "metric.components.weight");
      spec.components.push_back(std::move(component));
    }
  } else {
    throw Error(ErrorCode::ParseError, "metric: unknown kind '" + kind + "'");
  }
  return spec;
}

std::vector<std::vector<State>> blocks_of(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "partition: expected an array of blocks");
  std::vector<std::vector<State>> blocks;
  for (const auto& b : j) {
    if (!b.is_array()) throw Error(ErrorCode::ParseError, "partition: expected an array of blocks");
    std::vector<State> block;
    for (const auto& s : b) block.push_back(index1(s, 0, "partition"));
    blocks.push_back(std::move(block));
  }
  return blocks;
}

std::size_t infer_size(const json& doc) {
  if (doc.contains("n")) return index1(doc["n"], 0, "n") + 1;
  for (const char* key : {"generator", "dtmc"}) {
    if (!doc.contains(key)) continue;
    const json& c = doc[key];
    if (c.is_array()) return c.size();
    if (c.is_object() && c.contains("rows") && c["rows"].is_array()) return c["rows"].size();
  }
  if (doc.contains("metric") && doc["metric"].is_object()) {
    const json& m = doc["metric"];
    if (m.contains("matrix") && m["matrix"].is_array()) return m["matrix"].size();
    if (m.contains("positions") && m["positions"].is_array()) return m["positions"].size();
  }
  throw Error(ErrorCode::MissingField, "missing field 'n'");
}

// Canonical writer.

std::string num(double v) {
  if (std::isnan(v)) throw Error(ErrorCode::InvalidArgument, "cannot serialize NaN");
  if (std::isinf(v)) throw Error(ErrorCode::InvalidArgument, "cannot serialize infinity");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string vec(const Vector& v) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += num(v(i));
  }
  return out + "]";
}

std::string mat(const Matrix& m, const std::string& indent) {
  std::string out = "[\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out += indent + "  " + vec(m.row(r).transpose());
    out += r + 1 < m.rows() ? ",\n" : "\n";
  }
  return out + indent + "]";
}

std::string metric_json(const MetricSpec& spec, const std::string& indent) {
  const std::string inner = indent + "  ";
  std::string out = "{\n";
  switch (spec.kind) {
    case MetricSpec::Kind::Discrete:
      out += inner + "\"kind\": \"discrete\",\n" + inner + "\"n\": " + std::to_string(spec.n) + "\n";
      break;
    case MetricSpec::Kind::Line: {
      Vector p = Eigen::Map<const Vector>(spec.positions.data(), static_cast<Eigen::Index>(spec.positions.size()));
      out += inner + "\"kind\": \"line\",\n" + inner + "\"positions\": " + vec(p) + "\n";
      break;
    }
    case MetricSpec::Kind::Graph: {
      out += inner + "\"kind\": \"graph\",\n" + inner + "\"n\": " + std::to_string(spec.n) + ",\n";
      out += inner + "\"edges\": [";
      for (std::size_t i = 0; i < spec.edges.size(); ++i) {
        const auto& e = spec.edges[i];
        out += (i ? ",\n" : "\n") + inner + "  [" + std::to_string(e.from + 1) + ", " + std::to_string(e.to + 1) +
               ", " + num(e.weight) + "]";
      }
      out += spec.edges.empty() ? "]\n" : "\n" + inner + "]\n";
      break;
    }
    case MetricSpec::Kind::Explicit:
      out += inner + "\"kind\": \"explicit\",\n" + inner + "\"matrix\": " + mat(spec.matrix, inner) + "\n";
      break;
    case MetricSpec::Kind::Product: {
      out += inner + "\"kind\": \"product\",\n" + inner + "\"components\": [";
      for (std::size_t i = 0; i < spec.components.size(); ++i) {
        const auto& c = spec.components[i];
        const std::string deeper = inner + "    ";
        out += (i ? ",\n" : "\n") + inner + "  {\n" + deeper + "\"metric\": " + metric_json(c.metric, deeper) +
               ",\n" + deeper + "\"weight\": " + num(c.weight) + "\n" + inner + "  }";
      }
      out += spec.components.empty() ? "]\n" : "\n" + inner + "]\n";
      break;
    }
  }
  return out + indent + "}";
}

std::vector<double> numbers_from_text(const std::string& text) {
  std::string cleaned = text;
  for (char& c : cleaned) {
    if (c == ',' || c == '[' || c == ']' || c == ';') c = ' ';
  }
  std::istringstream in(cleaned);
  std::vector<double> values;
  std::string token;
  while (in >> token) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size() || used == 0) throw Error(ErrorCode::ParseError, "not a number: '" + token + "'");
    values.push_back(v);
  }
  return values;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::size_t positive_index(const std::string& text, std::size_t limit, const char* what) {
  std::size_t used = 0;
  long long value = 0;
  try {
    value = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw Error(ErrorCode::ParseError, std::string(what) + " '" + text + "' is not an integer");
  if (value < 1 || static_cast<std::size_t>(value) > limit) {
    throw Error(ErrorCode::IndexOutOfRange, std::string(what) + " " + text + " outside 1.." + std::to_string(limit));
  }
  return static_cast<std::size_t>(value - 1);
}

}  // namespace

Model load_model_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "model must be a JSON object");

  Model model;
  try {
    model.n = infer_size(doc);
    if (doc.contains("generator")) model.generator = chain_of<Generator>(doc["generator"], model.n, "generator");
    if (doc.contains("dtmc")) model.dtmc = chain_of<TransitionMatrix>(doc["dtmc"], model.n, "dtmc");
    if (doc.contains("metric")) model.set_metric(metric_of(doc["metric"], model.n));
    if (doc.contains("partition")) model.partition = Partition::from_blocks(model.n, blocks_of(doc["partition"]));
    if (doc.contains("alpha")) {
      const json& a = doc["alpha"];
      if (a.is_string()) {
        if (a.get<std::string>() != "uniform") throw Error(ErrorCode::BadAlpha, "alpha must be 'uniform' or a list");
      } else {
        if (!a.is_array()) throw Error(ErrorCode::BadAlpha, "alpha must be 'uniform' or a list");
        std::vector<Vector> weights;
        for (const auto& w : a) weights.push_back(vector_of(w, "alpha"));
        model.alpha = std::move(weights);
      }
    }
    if (doc.contains("initial")) model.initial = ProbVec::validate(vector_of(doc["initial"], "initial"));
    if (doc.contains("target")) model.target = ProbVec::validate(vector_of(doc["target"], "target"));
    if (doc.contains("aggregation")) {
      const json& a = doc["aggregation"];
      Matrix A = matrix_of(field(a, "A"), "aggregation.A");
      if (a.contains("Theta")) {
        model.aggregation = explicit_aggregation_ctmc(std::move(A), Generator::validate(matrix_of(a["Theta"], "aggregation.Theta")));
      } else if (a.contains("Pi")) {
        model.aggregation = explicit_aggregation_dtmc(std::move(A), TransitionMatrix::validate(matrix_of(a["Pi"], "aggregation.Pi")));
      } else {
        throw Error(ErrorCode::MissingField, "aggregation needs 'Theta' or 'Pi'");
      }
      if (a.contains("pi0")) model.pi0 = ProbVec::validate(vector_of(a["pi0"], "aggregation.pi0"));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  model.validate();
  return model;
}

Model load_model_file(const std::string& path) { return load_model_json(read_file(path)); }

std::string model_to_json(const Model& model) {
  model.validate();
  std::vector<std::string> fields;
  fields.push_back("  \"n\": " + std::to_string(model.n));
  if (model.generator) fields.push_back("  \"generator\": {\n    \"rows\": " + mat(model.generator->rates(), "    ") + "\n  }");
  if (model.dtmc) fields.push_back("  \"dtmc\": {\n    \"rows\": " + mat(model.dtmc->probs(), "    ") + "\n  }");
  if (model.metric_spec) fields.push_back("  \"metric\": " + metric_json(*model.metric_spec, "  "));
  if (model.partition) {
    std::string out = "  \"partition\": [";
    const auto& blocks = model.partition->blocks();
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      out += b ? ", [" : "[";
      for (std::size_t i = 0; i < blocks[b].size(); ++i) out += (i ? ", " : "") + std::to_string(blocks[b][i] + 1);
      out += "]";
    }
    fields.push_back(out + "]");
  }
  if (model.alpha) {
    std::string out = "  \"alpha\": [";
    for (std::size_t b = 0; b < model.alpha->size(); ++b) out += (b ? ", " : "") + vec((*model.alpha)[b]);
    fields.push_back(out + "]");
  }
  if (model.initial) fields.push_back("  \"initial\": " + vec(model.initial->mass()));
  if (model.target) fields.push_back("  \"target\": " + vec(model.target->mass()));
  if (model.aggregation) {
    const Aggregation& a = *model.aggregation;
    std::string out = "  \"aggregation\": {\n    \"A\": " + mat(a.A, "    ");
    out += a.Theta ? ",\n    \"Theta\": " + mat(a.Theta->rates(), "    ") : ",\n    \"Pi\": " + mat(a.Pi->probs(), "    ");
    if (model.pi0) out += ",\n    \"pi0\": " + vec(model.pi0->mass());
    fields.push_back(out + "\n  }");
  }
  std::string out = "{\n";
  for (std::size_t i = 0; i < fields.size(); ++i) out += fields[i] + (i + 1 < fields.size() ? ",\n" : "\n");
  return out + "}\n";
}

ProbVec parse_distribution(const std::string& spec, const Model& model) {
  const std::size_t n = model.n;
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (head == "uniform" && colon == std::string::npos) return uniform(n);
  if (head == "dirac") return dirac(n, positive_index(arg, n, "state"));
  if (head == "uniform-block") {
    if (!model.partition) throw Error(ErrorCode::MissingField, "uniform-block needs a partition");
    const std::size_t b = positive_index(arg, model.partition->block_count(), "block");
    Vector p = Vector::Zero(static_cast<Eigen::Index>(n));
    const auto& members = model.partition->block(b);
    for (State s : members) p(s) = 1.0 / static_cast<double>(members.size());
    return ProbVec::validate(std::move(p));
  }
  if (head == "file" || head == "vec") {
    std::vector<double> values;
    if (head == "vec") {
      values = numbers_from_text(arg);
    } else {
      const std::string text = read_file(arg);
      try {
        const json doc = json::parse(text);
        const json& list = doc.is_object() ? field(doc, "distribution") : doc;
        const Vector v = vector_of(list, "distribution file");
        values.assign(v.data(), v.data() + v.size());
      } catch (const json::parse_error&) {
        values = numbers_from_text(text);
      }
    }
    if (values.size() != n) {
      throw Error(ErrorCode::DimensionMismatch, "distribution has " + std::to_string(values.size()) +
                                                    " entries, model has " + std::to_string(n) + " states");
    }
    return ProbVec::validate(Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size())));
  }
  if (spec == "initial") {
    if (!model.initial) throw Error(ErrorCode::MissingField, "model has no initial distribution");
    return *model.initial;
  }
  if (spec == "target") {
    if (!model.target) throw Error(ErrorCode::MissingField, "model has no target distribution");
    return *model.target;
  }
  throw Error(ErrorCode::ParseError, "unknown distribution spec '" + spec + "'");
}

std::vector<std::vector<State>> parse_blocks(const std::string& text) {
  std::vector<std::vector<State>> blocks;
  std::istringstream in(text);
  std::string block;
  while (std::getline(in, block, ';')) {
    std::vector<State> members;
    std::istringstream items(block);
    std::string item;
    while (std::getline(items, item, ',')) {
      const auto first = item.find_first_not_of(' ');
      const auto last = item.find_last_not_of(' ');
      if (first == std::string::npos) continue;
      members.push_back(positive_index(item.substr(first, last - first + 1), static_cast<std::size_t>(-2), "state"));
    }
    blocks.push_back(std::move(members));
  }
  return blocks;
}

std::vector<std::vector<State>> parse_blocks_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    return blocks_of(doc.is_object() ? field(doc, "partition") : doc);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

}  // namespace wbound
