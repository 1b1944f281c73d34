#include "dda/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dda {

namespace {

using nlohmann::json;

json parse_document(const std::filesystem::path& path, const char* expected_format) {
  json doc;
  try {
    doc = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != expected_format) {
    throw FormatError(path.string() + ": expected format tag '" + expected_format + "'");
  }
  if (doc.value("version", -1) != formats::kVersion) {
    throw FormatError(path.string() + ": unsupported version");
  }
  return doc;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows, const std::string& what) {
  if (!rows.is_array() || rows.empty()) throw FormatError(what + ": expected non-empty array");
  const auto nrows = static_cast<Eigen::Index>(rows.size());
  const auto ncols = static_cast<Eigen::Index>(rows[0].size());
  Eigen::MatrixXd m(nrows, ncols);
  for (Eigen::Index r = 0; r < nrows; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    if (static_cast<Eigen::Index>(row.size()) != ncols) {
      throw FormatError(what + ": ragged rows");
    }
    for (Eigen::Index c = 0; c < ncols; ++c) {
      m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from_json(const json& arr, const std::string& what) {
  if (!arr.is_array()) throw FormatError(what + ": expected array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  return v;
}

// Splits one CSV line; the formats here never quote fields.
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_double(const std::string& field, const std::filesystem::path& path) {
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end == field.c_str()) throw FormatError(path.string() + ": bad number '" + field + "'");
  return v;
}

long parse_long(const std::string& field, const std::filesystem::path& path) {
  char* end = nullptr;
  const long v = std::strtol(field.c_str(), &end, 10);
  if (end == field.c_str()) throw FormatError(path.string() + ": bad integer '" + field + "'");
  return v;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;  // %.17g always round-trips finite doubles
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void write_dataset(const std::filesystem::path& path, const Eigen::MatrixXd& X,
                   const Eigen::VectorXd& D) {
  if (X.rows() != D.size()) throw std::invalid_argument("write_dataset: size mismatch");
  std::string out;
  out.reserve(static_cast<std::size_t>(X.rows()) * (static_cast<std::size_t>(X.cols()) + 2) * 20);
  out += "player_id";
  for (Eigen::Index c = 0; c < X.cols(); ++c) out += ",f" + std::to_string(c);
  out += ",difficulty\n";
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    out += std::to_string(r);
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
      out += ',';
      out += format_double(X(r, c));
    }
    out += ',';
    out += format_double(D[r]);
    out += '\n';
  }
  write_text_atomic(path, out);
}

LoadedDataset read_dataset(const std::filesystem::path& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.size() < 2) throw FormatError(path.string() + ": no data rows");

  const std::vector<std::string> header = split_csv(lines[0]);
  if (header.size() < 3 || header.front() != "player_id" || header.back() != "difficulty") {
    throw FormatError(path.string() + ": expected header player_id,f0..,difficulty");
  }
  const auto z = static_cast<Eigen::Index>(header.size() - 2);
  for (Eigen::Index c = 0; c < z; ++c) {
    if (header[static_cast<std::size_t>(c) + 1] != "f" + std::to_string(c)) {
      throw FormatError(path.string() + ": unexpected feature column '" +
                        header[static_cast<std::size_t>(c) + 1] + "'");
    }
  }

  const auto m = static_cast<Eigen::Index>(lines.size() - 1);
  LoadedDataset ds{Eigen::MatrixXd(m, z), Eigen::VectorXd(m)};
  for (Eigen::Index r = 0; r < m; ++r) {
    const std::vector<std::string> fields = split_csv(lines[static_cast<std::size_t>(r) + 1]);
    if (fields.size() != header.size()) {
      throw FormatError(path.string() + ": row " + std::to_string(r) + " has " +
                        std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(header.size()));
    }
    for (Eigen::Index c = 0; c < z; ++c) {
      ds.features(r, c) = parse_double(fields[static_cast<std::size_t>(c) + 1], path);
    }
    ds.difficulty[r] = parse_double(fields.back(), path);
  }
  return ds;
}

void write_dataset_meta(const std::filesystem::path& path, const PlayerDataset& ds) {
  json doc;
  doc["format"] = formats::kDatasetMeta;
  doc["version"] = formats::kVersion;
  doc["scenario"] = {
      {"players", ds.scenario.players},
      {"feature_dim", ds.scenario.feature_dim},
      {"kind", scenario_name(ds.scenario.kind)},
      {"segments", ds.scenario.segments},
      {"seed", ds.scenario.seed},
      {"period_play", ds.scenario.period_play},
      {"period_features", ds.scenario.period_features},
  };
  json truth;
  truth["noise_sd"] = ds.truth.noise_sd;
  switch (ds.scenario.kind) {
    case ScenarioKind::Linear:
      truth["weights"] = vector_to_json(ds.truth.weights);
      break;
    case ScenarioKind::Piecewise:
      truth["thresholds"] = ds.truth.thresholds;
      truth["levels"] = ds.truth.levels;
      break;
    case ScenarioKind::HeterogeneousSegments:
      truth["segment_centers"] = matrix_to_json(ds.truth.segment_centers);
      truth["segment_weights"] = matrix_to_json(ds.truth.segment_weights);
      truth["segment_base"] = vector_to_json(ds.truth.segment_base);
      truth["segment_of_player"] = ds.truth.segment_of_player;
      break;
  }
  doc["ground_truth"] = std::move(truth);
  write_text_atomic(path, doc.dump(2) + "\n");
}

void save_weights(const std::filesystem::path& path, const NetworkWeights& w) {
  w.validate();
  json doc;
  doc["format"] = formats::kWeights;
  doc["version"] = formats::kVersion;
  doc["architecture"] = {
      {"input_dim", w.arch.input_dim},
      {"hidden_dims", w.arch.hidden_dims},
      {"activation", activation_name(w.arch.activation)},
  };
  json layers = json::array();
  for (const auto& layer : w.layers) {
    layers.push_back({{"weights", matrix_to_json(layer.weights)},
                      {"bias", vector_to_json(layer.bias)}});
  }
  doc["layers"] = std::move(layers);
  write_text_atomic(path, doc.dump(2) + "\n");
}

NetworkWeights load_weights(const std::filesystem::path& path) {
  const json doc = parse_document(path, formats::kWeights);
  try {
    NetworkWeights w;
    const auto& arch = doc.at("architecture");
    w.arch.input_dim = arch.at("input_dim").get<int>();
    w.arch.hidden_dims = arch.at("hidden_dims").get<std::vector<int>>();
    w.arch.activation = parse_activation(arch.at("activation").get<std::string>());
    for (const auto& layer : doc.at("layers")) {
      w.layers.push_back({matrix_from_json(layer.at("weights"), "weights"),
                          vector_from_json(layer.at("bias"), "bias")});
    }
    w.validate();
    return w;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

namespace {

json normalizer_to_json(const FeatureNormalizer& n) {
  json doc;
  doc["format"] = formats::kNormalizer;
  doc["version"] = formats::kVersion;
  doc["mean"] = vector_to_json(n.mean);
  doc["stddev"] = vector_to_json(n.stddev);
  doc["retained"] = n.retained;
  return doc;
}

FeatureNormalizer normalizer_from_json(const json& doc, const std::filesystem::path& path) {
  try {
    FeatureNormalizer n;
    n.mean = vector_from_json(doc.at("mean"), "mean");
    n.stddev = vector_from_json(doc.at("stddev"), "stddev");
    n.retained = doc.at("retained").get<std::vector<bool>>();
    if (n.mean.size() != n.stddev.size() ||
        n.retained.size() != static_cast<std::size_t>(n.mean.size())) {
      throw FormatError(path.string() + ": inconsistent normalizer arrays");
    }
    return n;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace

std::string normalizer_to_string(const FeatureNormalizer& n) {
  return normalizer_to_json(n).dump(2) + "\n";
}

void save_normalizer(const std::filesystem::path& path, const FeatureNormalizer& n) {
  write_text_atomic(path, normalizer_to_string(n));
}

FeatureNormalizer load_normalizer(const std::filesystem::path& path) {
  return normalizer_from_json(parse_document(path, formats::kNormalizer), path);
}

void save_assignment(const std::filesystem::path& path, const ClusterAssignment& a,
                     const FeatureNormalizer& n) {
  a.validate(static_cast<Eigen::Index>(a.labels.size()));
  json doc;
  doc["format"] = formats::kAssignment;
  doc["version"] = formats::kVersion;
  doc["k"] = a.k;
  doc["labels"] = a.labels;
  doc["centroids"] = matrix_to_json(a.centroids);
  doc["wcss_history"] = a.wcss_history;
  doc["normalizer"] = normalizer_to_json(n);
  write_text_atomic(path, doc.dump(2) + "\n");
}

LoadedAssignment load_assignment(const std::filesystem::path& path) {
  const json doc = parse_document(path, formats::kAssignment);
  try {
    LoadedAssignment out;
    out.assignment.k = doc.at("k").get<int>();
    out.assignment.labels = doc.at("labels").get<std::vector<int>>();
    out.assignment.centroids = matrix_from_json(doc.at("centroids"), "centroids");
    out.assignment.wcss_history = doc.at("wcss_history").get<std::vector<double>>();
    out.normalizer = normalizer_from_json(doc.at("normalizer"), path);
    out.assignment.validate(static_cast<Eigen::Index>(out.assignment.labels.size()));
    if (out.assignment.centroids.cols() != out.normalizer.dim()) {
      throw FormatError(path.string() + ": centroid/normalizer dimension mismatch");
    }
    return out;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_policy(const std::filesystem::path& path, const RuleBasedPolicy& p) {
  json doc;
  doc["format"] = formats::kPolicy;
  doc["version"] = formats::kVersion;
  doc["default_difficulty"] = p.default_difficulty;
  json rules = json::array();
  for (const auto& r : p.rules) {
    rules.push_back({{"feature", r.feature}, {"threshold", r.threshold}, {"difficulty", r.difficulty}});
  }
  doc["rules"] = std::move(rules);
  write_text_atomic(path, doc.dump(2) + "\n");
}

RuleBasedPolicy load_policy(const std::filesystem::path& path) {
  const json doc = parse_document(path, formats::kPolicy);
  try {
    RuleBasedPolicy p;
    p.default_difficulty = doc.at("default_difficulty").get<double>();
    for (const auto& r : doc.at("rules")) {
      p.rules.push_back({r.at("feature").get<int>(), r.at("threshold").get<double>(),
                         r.at("difficulty").get<double>()});
    }
    return p;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_trace_steps(const std::filesystem::path& path, const TrainingTrace& trace) {
  std::string out = "step,phase,ux_loss,completion_abs_err,batch_id\n";
  out.reserve(out.size() + trace.steps.size() * 48);
  for (const auto& s : trace.steps) {
    out += std::to_string(s.step);
    out += ',';
    out += phase_name(s.phase);
    out += ',';
    out += format_double(s.ux_loss);
    out += ',';
    out += format_double(s.completion_abs_err);
    out += ',';
    out += std::to_string(s.batch_id);
    out += '\n';
  }
  write_text_atomic(path, out);
}

void write_trace_alternations(const std::filesystem::path& path, const TrainingTrace& trace) {
  std::string out = "cycle,dist_M_to_C,dist_M_to_nextC\n";
  for (const auto& a : trace.alternations) {
    out += std::to_string(a.cycle);
    out += ',';
    out += format_double(a.dist_m_to_c);
    out += ',';
    out += format_double(a.dist_m_to_next_c);
    out += '\n';
  }
  write_text_atomic(path, out);
}

TrainingTrace read_trace(const std::filesystem::path& steps_path,
                         const std::filesystem::path& alternations_path) {
  TrainingTrace trace;

  const std::vector<std::string> step_lines = read_lines(steps_path);
  if (step_lines.empty() || split_csv(step_lines[0]) !=
                                std::vector<std::string>{"step", "phase", "ux_loss",
                                                         "completion_abs_err", "batch_id"}) {
    throw FormatError(steps_path.string() + ": unexpected step table header");
  }
  for (std::size_t i = 1; i < step_lines.size(); ++i) {
    const auto fields = split_csv(step_lines[i]);
    if (fields.size() != 5) throw FormatError(steps_path.string() + ": bad step row");
    StepRecord rec;
    rec.step = parse_long(fields[0], steps_path);
    rec.phase = parse_phase(fields[1]);
    rec.ux_loss = parse_double(fields[2], steps_path);
    rec.completion_abs_err = parse_double(fields[3], steps_path);
    rec.batch_id = parse_long(fields[4], steps_path);
    trace.next_step = std::max(trace.next_step, rec.step + 1);
    trace.steps.push_back(rec);
  }

  const std::vector<std::string> alt_lines = read_lines(alternations_path);
  if (alt_lines.empty() || split_csv(alt_lines[0]) != std::vector<std::string>{
                                                          "cycle", "dist_M_to_C", "dist_M_to_nextC"}) {
    throw FormatError(alternations_path.string() + ": unexpected alternation table header");
  }
  for (std::size_t i = 1; i < alt_lines.size(); ++i) {
    const auto fields = split_csv(alt_lines[i]);
    if (fields.size() != 3) throw FormatError(alternations_path.string() + ": bad alternation row");
    AlternationRecord rec;
    rec.cycle = static_cast<int>(parse_long(fields[0], alternations_path));
    rec.dist_m_to_c = parse_double(fields[1], alternations_path);
    rec.dist_m_to_next_c = parse_double(fields[2], alternations_path);
    trace.alternations.push_back(rec);
  }
  return trace;
}

}  // namespace dda
