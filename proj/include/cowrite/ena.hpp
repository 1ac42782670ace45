#pragma once

// Epistemic network models over coded events.
//
// Units are (session, author); conversations are (session, author, sentence).
// Within a conversation events are taken in order and, for event t with code
// set C_t and running union S_t = C_1 ∪ ... ∪ C_t, every unordered pair {i,j}
// with (i ∈ C_t and j ∈ S_t) or (j ∈ C_t and i ∈ S_t) gains 1. Unit vectors
// are summed over conversations, sphere-normalised, mean-centred and rotated
// by SVD. Node positions are the least-squares solution placing each unit's
// weighted edge-midpoint centroid on its score.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include "cowrite/coder.hpp"
#include "cowrite/csv.hpp"
#include "cowrite/error.hpp"
#include "cowrite/parallel.hpp"

namespace cowrite::ena {

inline constexpr std::size_t pair_count(std::size_t k) { return k * (k - 1) / 2; }

/// Position of pair {i,j}, i < j, in lexicographic order.
inline constexpr std::size_t pair_index(std::size_t i, std::size_t j, std::size_t k) {
  if (i > j) std::swap(i, j);
  return i * k - i * (i + 1) / 2 + (j - i - 1);
}

inline std::vector<std::pair<std::size_t, std::size_t>> pairs(std::size_t k) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(pair_count(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) out.emplace_back(i, j);
  return out;
}

inline std::vector<std::string> default_code_names() { return {kCodeNames.begin(), kCodeNames.end()}; }

/// Adds one conversation's contribution to `acc` (length pair_count(k)).
/// Each event is a length-k presence vector.
inline void accumulate_conversation(const std::vector<std::vector<bool>>& events, std::size_t k,
                                    std::vector<double>& acc) {
  std::vector<bool> seen(k, false);
  for (const auto& ev : events) {
    for (std::size_t c = 0; c < k; ++c)
      if (ev[c]) seen[c] = true;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) {
        if ((ev[i] && seen[j]) || (ev[j] && seen[i])) acc[pair_index(i, j, k)] += 1.0;
      }
    }
  }
}

struct UnitKey {
  std::string session_id;
  std::string author_id;
  friend auto operator<=>(const UnitKey&, const UnitKey&) = default;
  std::string label() const { return session_id + "/" + author_id; }
};

struct AdjacencyVector {
  UnitKey unit;
  std::vector<double> values;
};

/// One adjacency vector per unit, ordered by unit key. Events of a session are
/// taken in event_index order; events without a sentence share one conversation.
inline std::vector<AdjacencyVector> accumulate(const std::vector<CodedEvent>& coded, unsigned jobs = 1) {
  using ConvKey = std::optional<std::size_t>;
  std::map<UnitKey, std::map<ConvKey, std::vector<const CodedEvent*>>> units;
  for (const auto& e : coded) units[{e.session_id, e.author_id}][e.sentence_id].push_back(&e);

  std::vector<std::pair<const UnitKey*, const std::map<ConvKey, std::vector<const CodedEvent*>>*>> work;
  for (const auto& [key, convs] : units) work.emplace_back(&key, &convs);

  std::vector<AdjacencyVector> out(work.size());
  parallel_for(work.size(), jobs, [&](std::size_t u) {
    out[u].unit = *work[u].first;
    out[u].values.assign(pair_count(kNumCodes), 0.0);
    for (const auto& [_, events] : *work[u].second) {
      auto sorted = events;
      std::stable_sort(sorted.begin(), sorted.end(),
                       [](const CodedEvent* a, const CodedEvent* b) { return a->event_index < b->event_index; });
      std::vector<std::vector<bool>> rows;
      rows.reserve(sorted.size());
      for (const auto* e : sorted) {
        std::vector<bool> r(kNumCodes);
        for (std::size_t c = 0; c < kNumCodes; ++c) r[c] = e->codes.test(c);
        rows.push_back(std::move(r));
      }
      accumulate_conversation(rows, kNumCodes, out[u].values);
    }
  });
  return out;
}

inline Eigen::MatrixXd to_matrix(const std::vector<AdjacencyVector>& vectors) {
  if (vectors.empty()) return {};
  Eigen::MatrixXd m(static_cast<Eigen::Index>(vectors.size()), static_cast<Eigen::Index>(vectors.front().values.size()));
  for (std::size_t r = 0; r < vectors.size(); ++r) {
    if (vectors[r].values.size() != static_cast<std::size_t>(m.cols())) throw UsageError("adjacency vectors differ in length");
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(static_cast<Eigen::Index>(r), c) = vectors[r].values[static_cast<std::size_t>(c)];
  }
  return m;
}

struct Normalized {
  Eigen::MatrixXd values;
  std::vector<bool> zero;  // unit had no co-occurrences
};

inline Normalized sphere_normalize(const Eigen::MatrixXd& raw) {
  Normalized out{raw, std::vector<bool>(static_cast<std::size_t>(raw.rows()), false)};
  for (Eigen::Index r = 0; r < raw.rows(); ++r) {
    const double n = raw.row(r).norm();
    if (n == 0.0) out.zero[static_cast<std::size_t>(r)] = true;
    else out.values.row(r) /= n;
  }
  return out;
}

struct Projection {
  Eigen::VectorXd mean;               // column means removed before rotation
  Eigen::MatrixXd rotation;           // P x D, orthonormal columns
  Eigen::MatrixXd scores;             // N x D
  Eigen::VectorXd singular_values;    // all of them
  std::vector<double> variance_explained;  // D entries
};

/// Column-centres `x` and rotates it onto its leading right singular vectors.
/// Each rotation column is signed so its largest-magnitude loading is positive.
inline Projection project(const Eigen::MatrixXd& x, std::size_t dims) {
  if (x.rows() < 2) throw UsageError("projection needs at least two units");
  if (dims == 0) throw UsageError("projection needs at least one dimension");
  const auto d = static_cast<Eigen::Index>(dims);
  if (d > x.cols()) throw UsageError("more dimensions requested than adjacency columns");

  Projection p;
  p.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - p.mean.transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericalError("SVD did not converge");

  const Eigen::Index available = svd.matrixV().cols();
  p.singular_values = svd.singularValues();
  p.rotation = Eigen::MatrixXd::Zero(x.cols(), d);
  p.rotation.leftCols(std::min(d, available)) = svd.matrixV().leftCols(std::min(d, available));
  for (Eigen::Index c = 0; c < std::min(d, available); ++c) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < p.rotation.rows(); ++r) {
      const double a = std::abs(p.rotation(r, c));
      if (a > best + 1e-12) {
        best = a;
        arg = r;
      }
    }
    if (p.rotation(arg, c) < 0) p.rotation.col(c) *= -1.0;
  }
  p.scores = centered * p.rotation;
  const double total = p.singular_values.squaredNorm();
  for (Eigen::Index c = 0; c < d; ++c) {
    const double s = c < p.singular_values.size() ? p.singular_values(c) : 0.0;
    p.variance_explained.push_back(total > 0 ? s * s / total : 0.0);
  }
  return p;
}

/// Row u holds, for each code k, the share of unit u's total edge weight on
/// pairs touching k, halved (so a unit's centroid is A_u · x).
inline Eigen::MatrixXd centroid_operator(const Eigen::MatrixXd& weights, std::size_t k) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(weights.rows(), static_cast<Eigen::Index>(k));
  const auto ps = pairs(k);
  for (Eigen::Index u = 0; u < weights.rows(); ++u) {
    const double total = weights.row(u).sum();
    if (total == 0.0) continue;
    for (std::size_t p = 0; p < ps.size(); ++p) {
      const double w = weights(u, static_cast<Eigen::Index>(p)) / (2.0 * total);
      a(u, static_cast<Eigen::Index>(ps[p].first)) += w;
      a(u, static_cast<Eigen::Index>(ps[p].second)) += w;
    }
  }
  return a;
}

inline double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd ca = a.array() - a.mean();
  const Eigen::VectorXd cb = b.array() - b.mean();
  const double den = ca.norm() * cb.norm();
  if (den == 0.0) return 0.0;
  return ca.dot(cb) / den;
}

struct NodePlacement {
  Eigen::MatrixXd positions;  // K x D
  Eigen::MatrixXd centroids;  // N x D
  std::vector<double> fit;    // per-dimension Pearson(scores, centroids)
  bool rank_deficient = false;
};

inline NodePlacement position_nodes(const Eigen::MatrixXd& weights, const Eigen::MatrixXd& scores, std::size_t k) {
  const Eigen::MatrixXd a = centroid_operator(weights, k);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  NodePlacement out;
  out.rank_deficient = cod.rank() < static_cast<Eigen::Index>(k);
  out.positions = cod.solve(scores);
  if (!out.positions.allFinite()) throw NumericalError("node placement produced non-finite coordinates");
  out.centroids = a * out.positions;
  for (Eigen::Index d = 0; d < scores.cols(); ++d) out.fit.push_back(pearson(scores.col(d), out.centroids.col(d)));
  return out;
}

struct Model {
  std::vector<std::string> codes;
  std::vector<UnitKey> units;
  Eigen::MatrixXd raw;
  Eigen::MatrixXd normalized;
  std::vector<bool> zero_units;
  Projection projection;
  NodePlacement nodes;

  std::size_t dims() const { return static_cast<std::size_t>(projection.scores.cols()); }
  const Eigen::MatrixXd& scores() const { return projection.scores; }

  std::optional<std::size_t> find(const UnitKey& key) const {
    auto it = std::lower_bound(units.begin(), units.end(), key);
    if (it == units.end() || !(*it == key)) return std::nullopt;
    return static_cast<std::size_t>(it - units.begin());
  }
};

inline Model fit(const std::vector<AdjacencyVector>& vectors, std::size_t dims = 2,
                 std::vector<std::string> codes = default_code_names()) {
  if (vectors.empty()) throw UsageError("no units to model");
  if (vectors.front().values.size() != pair_count(codes.size()))
    throw UsageError("adjacency length does not match the code set");
  Model m;
  m.codes = std::move(codes);
  for (const auto& v : vectors) m.units.push_back(v.unit);
  if (!std::is_sorted(m.units.begin(), m.units.end())) throw UsageError("units must be sorted by key");
  m.raw = to_matrix(vectors);
  auto norm = sphere_normalize(m.raw);
  m.normalized = std::move(norm.values);
  m.zero_units = std::move(norm.zero);
  m.projection = project(m.normalized, dims);
  m.nodes = position_nodes(m.normalized, m.projection.scores, m.codes.size());
  return m;
}

// ---------------------------------------------------------------------------
// Group networks

struct NetworkGraph {
  std::string label;
  std::vector<std::string> codes;
  std::vector<double> weights;       // per pair; signed for differences
  std::vector<double> node_weights;  // per code: summed |weight| of incident edges
  Eigen::MatrixXd node_positions;
  Eigen::VectorXd centroid;  // mean score (difference of means for differences)
  bool difference = false;
};

inline std::vector<double> incident_weights(const std::vector<double>& w, std::size_t k) {
  std::vector<double> out(k, 0.0);
  const auto ps = pairs(k);
  for (std::size_t p = 0; p < ps.size(); ++p) {
    out[ps[p].first] += std::abs(w[p]);
    out[ps[p].second] += std::abs(w[p]);
  }
  return out;
}

inline NetworkGraph mean_network(const Model& m, const std::vector<std::size_t>& members, std::string label) {
  if (members.empty()) throw UsageError("mean network of an empty group");
  NetworkGraph g;
  g.label = std::move(label);
  g.codes = m.codes;
  const auto p = m.normalized.cols();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
  g.centroid = Eigen::VectorXd::Zero(m.projection.scores.cols());
  for (auto u : members) {
    w += m.normalized.row(static_cast<Eigen::Index>(u)).transpose();
    g.centroid += m.projection.scores.row(static_cast<Eigen::Index>(u)).transpose();
  }
  w /= static_cast<double>(members.size());
  g.centroid /= static_cast<double>(members.size());
  g.weights.assign(w.data(), w.data() + w.size());
  g.node_weights = incident_weights(g.weights, g.codes.size());
  g.node_positions = m.nodes.positions;
  return g;
}

inline NetworkGraph diff_network(const NetworkGraph& a, const NetworkGraph& b) {
  if (a.codes != b.codes || a.weights.size() != b.weights.size())
    throw UsageError("cannot subtract networks over different code sets");
  NetworkGraph g;
  g.label = "difference";
  g.codes = a.codes;
  g.difference = true;
  g.weights.resize(a.weights.size());
  for (std::size_t i = 0; i < a.weights.size(); ++i) g.weights[i] = a.weights[i] - b.weights[i];
  g.node_weights = incident_weights(g.weights, g.codes.size());
  g.node_positions = a.node_positions;
  g.centroid = a.centroid - b.centroid;
  return g;
}

// ---------------------------------------------------------------------------
// Export

inline std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

inline nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    j.push_back(std::move(row));
  }
  return j;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) return {};
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j[0].size()));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (j[r].size() != static_cast<std::size_t>(m.cols())) throw DataError("ragged matrix in model file");
    for (std::size_t c = 0; c < j[r].size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
  }
  return m;
}

inline std::vector<std::string> pair_labels(const std::vector<std::string>& codes) {
  std::vector<std::string> out;
  for (auto [i, j] : pairs(codes.size())) out.push_back(codes[i] + "&" + codes[j]);
  return out;
}

inline nlohmann::json to_json(const Model& m) {
  nlohmann::json units = nlohmann::json::array();
  for (std::size_t u = 0; u < m.units.size(); ++u)
    units.push_back({{"session_id", m.units[u].session_id},
                     {"author_id", m.units[u].author_id},
                     {"zero", static_cast<bool>(m.zero_units[u])}});
  return {{"codes", m.codes},
          {"pairs", pair_labels(m.codes)},
          {"units", std::move(units)},
          {"scores", matrix_json(m.projection.scores)},
          {"rotation", matrix_json(m.projection.rotation)},
          {"mean", to_vector(m.projection.mean)},
          {"singular_values", to_vector(m.projection.singular_values)},
          {"variance_explained", m.projection.variance_explained},
          {"node_positions", matrix_json(m.nodes.positions)},
          {"centroids", matrix_json(m.nodes.centroids)},
          {"fit", m.nodes.fit},
          {"rank_deficient", m.nodes.rank_deficient},
          {"normalized", matrix_json(m.normalized)},
          {"raw", matrix_json(m.raw)}};
}

inline Model model_from_json(const nlohmann::json& j) {
  try {
    Model m;
    m.codes = j.at("codes").get<std::vector<std::string>>();
    for (const auto& u : j.at("units")) {
      m.units.push_back({u.at("session_id").get<std::string>(), u.at("author_id").get<std::string>()});
      m.zero_units.push_back(u.value("zero", false));
    }
    m.raw = matrix_from_json(j.at("raw"));
    m.normalized = matrix_from_json(j.at("normalized"));
    m.projection.scores = matrix_from_json(j.at("scores"));
    m.projection.rotation = matrix_from_json(j.at("rotation"));
    auto mean = j.at("mean").get<std::vector<double>>();
    m.projection.mean = Eigen::Map<Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    auto sv = j.at("singular_values").get<std::vector<double>>();
    m.projection.singular_values = Eigen::Map<Eigen::VectorXd>(sv.data(), static_cast<Eigen::Index>(sv.size()));
    m.projection.variance_explained = j.at("variance_explained").get<std::vector<double>>();
    m.nodes.positions = matrix_from_json(j.at("node_positions"));
    m.nodes.centroids = matrix_from_json(j.at("centroids"));
    m.nodes.fit = j.at("fit").get<std::vector<double>>();
    m.nodes.rank_deficient = j.value("rank_deficient", false);
    if (m.units.size() != static_cast<std::size_t>(m.projection.scores.rows()))
      throw DataError("model file: unit count does not match scores");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
}

inline void write_adjacency_csv(std::ostream& out, const Model& m, bool normalized) {
  std::vector<std::string> header{"session_id", "author_id"};
  for (auto& l : pair_labels(m.codes)) header.push_back(l);
  csv::write_row(out, header);
  const auto& x = normalized ? m.normalized : m.raw;
  for (std::size_t u = 0; u < m.units.size(); ++u) {
    std::vector<std::string> row{m.units[u].session_id, m.units[u].author_id};
    for (Eigen::Index c = 0; c < x.cols(); ++c) row.push_back(csv::num(x(static_cast<Eigen::Index>(u), c)));
    csv::write_row(out, row);
  }
}

inline void write_scores_csv(std::ostream& out, const Model& m) {
  std::vector<std::string> header{"session_id", "author_id"};
  for (std::size_t d = 0; d < m.dims(); ++d) header.push_back("dim" + std::to_string(d + 1));
  csv::write_row(out, header);
  for (std::size_t u = 0; u < m.units.size(); ++u) {
    std::vector<std::string> row{m.units[u].session_id, m.units[u].author_id};
    for (std::size_t d = 0; d < m.dims(); ++d)
      row.push_back(csv::num(m.projection.scores(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(d))));
    csv::write_row(out, row);
  }
}

inline nlohmann::json to_json(const NetworkGraph& g) {
  return {{"label", g.label},
          {"difference", g.difference},
          {"codes", g.codes},
          {"pairs", pair_labels(g.codes)},
          {"weights", g.weights},
          {"node_weights", g.node_weights},
          {"node_positions", matrix_json(g.node_positions)},
          {"centroid", to_vector(g.centroid)}};
}

inline void write_network_csv(std::ostream& out, const NetworkGraph& g) {
  csv::write_row(out, {"code_a", "code_b", "weight"});
  const auto ps = pairs(g.codes.size());
  for (std::size_t p = 0; p < ps.size(); ++p)
    csv::write_row(out, {g.codes[ps[p].first], g.codes[ps[p].second], csv::num(g.weights[p])});
}

}  // namespace cowrite::ena
