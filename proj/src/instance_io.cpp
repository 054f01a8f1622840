#include "dgnn/instance_io.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace dgnn {

namespace {

// Next non-blank, non-comment line split into whitespace tokens.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::vector<std::string> next(const char* context) {
    auto tokens = try_next();
    if (!tokens) throw ParseError(std::string("unexpected end of input while reading ") + context);
    return *tokens;
  }

  std::optional<std::vector<std::string>> try_next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::istringstream ss(line);
      std::vector<std::string> tokens;
      for (std::string t; ss >> t;) tokens.push_back(t);
      if (!tokens.empty()) return tokens;
    }
    return std::nullopt;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("line " + std::to_string(line_no_) + ": " + what);
  }

  int line() const { return line_no_; }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

double to_double(LineReader& r, const std::string& s) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) r.fail("trailing characters in number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    r.fail("expected a number, got '" + s + "'");
  }
}

long long to_int(LineReader& r, const std::string& s) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(s, &used);
    if (used != s.size()) r.fail("trailing characters in integer '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    r.fail("expected an integer, got '" + s + "'");
  }
}

std::size_t to_index(LineReader& r, const std::string& s) {
  const long long v = to_int(r, s);
  if (v < 0) r.fail("negative index '" + s + "'");
  return static_cast<std::size_t>(v);
}

void expect_header(LineReader& r, const std::vector<std::string>& t, const char* keyword,
                   std::size_t args) {
  if (t.empty() || t[0] != keyword) r.fail(std::string("expected '") + keyword + "'");
  if (t.size() != args + 1) r.fail(std::string("'") + keyword + "' takes " + std::to_string(args) + " arguments");
}

BitMatrix read_bit_rows(LineReader& r, std::size_t rows, std::size_t cols, const char* what) {
  BitMatrix bits(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    auto t = r.next(what);
    if (t.size() != 1 || t[0].size() != cols) {
      r.fail(std::string(what) + " row must be a single word of " + std::to_string(cols) + " bits");
    }
    for (std::size_t j = 0; j < cols; ++j) {
      const char c = t[0][j];
      if (c != '0' && c != '1') r.fail(std::string(what) + " rows may only contain 0 and 1");
      bits(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c == '1' ? 1 : 0;
    }
  }
  auto end = r.next(what);
  if (end.size() != 1 || end[0] != "end") r.fail(std::string("expected 'end' after ") + what);
  return bits;
}

void write_bit_rows(std::ostream& out, const BitMatrix& bits) {
  for (Eigen::Index i = 0; i < bits.rows(); ++i) {
    for (Eigen::Index j = 0; j < bits.cols(); ++j) out << (bits(i, j) ? '1' : '0');
    out << '\n';
  }
  out << "end\n";
}

Graph parse_graph(LineReader& r, const std::vector<std::string>& header) {
  expect_header(r, header, "graph", 1);
  const std::size_t n = to_index(r, header[1]);
  std::vector<Point> pos;
  std::vector<bool> seen(n, false);
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (;;) {
    auto t = r.next("graph");
    if (t[0] == "end" && t.size() == 1) break;
    if (t[0] == "pos" && t.size() == 4) {
      const std::size_t i = to_index(r, t[1]);
      if (i >= n) r.fail("position index out of range");
      if (pos.empty()) pos.assign(n, Point{});
      pos[i] = Point{to_double(r, t[2]), to_double(r, t[3])};
      seen[i] = true;
    } else if (t[0] == "edge" && t.size() == 3) {
      const std::size_t u = to_index(r, t[1]);
      const std::size_t v = to_index(r, t[2]);
      if (u >= n || v >= n) r.fail("edge endpoint out of range");
      if (u == v) r.fail("self loop");
      edges.emplace_back(u, v);
    } else {
      r.fail("expected 'pos i x y', 'edge u v' or 'end' in graph block");
    }
  }
  if (!pos.empty()) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!seen[i]) r.fail("graph gives positions for some nodes but not node " + std::to_string(i));
    }
  }
  return Graph::from_edges(n, edges, std::move(pos));
}

GnnModel parse_model(LineReader& r, const std::vector<std::string>& header) {
  expect_header(r, header, "model", 2);
  const std::size_t p = to_index(r, header[1]);
  const std::size_t hidden = to_index(r, header[2]);
  if (p == 0 || hidden == 0) r.fail("model dimensions must be positive");
  GnnModel m;
  m.theta.resize(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(hidden));
  m.w.resize(static_cast<Eigen::Index>(hidden));
  for (std::size_t j = 0; j < p; ++j) {
    auto t = r.next("model");
    if (t[0] != "theta" || t.size() != hidden + 1) r.fail("expected 'theta' followed by D values");
    for (std::size_t i = 0; i < hidden; ++i) {
      m.theta(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = to_double(r, t[i + 1]);
    }
  }
  auto t = r.next("model");
  if (t[0] != "w" || t.size() != hidden + 1) r.fail("expected 'w' followed by D values");
  for (std::size_t i = 0; i < hidden; ++i) m.w(static_cast<Eigen::Index>(i)) = to_double(r, t[i + 1]);
  t = r.next("model");
  if (t[0] != "b" || t.size() != 2) r.fail("expected 'b <value>'");
  m.b = to_double(r, t[1]);
  t = r.next("model");
  if (t.size() != 1 || t[0] != "end") r.fail("expected 'end' after model");
  return m;
}

BitMatrix parse_features(LineReader& r, const std::vector<std::string>& header) {
  expect_header(r, header, "features", 2);
  return read_bit_rows(r, to_index(r, header[1]), to_index(r, header[2]), "features");
}

}  // namespace

void write_graph(std::ostream& out, const Graph& graph) {
  out << "graph " << graph.size() << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < graph.size(); ++i) {
    out << "pos " << i << ' ' << graph.position(i).x << ' ' << graph.position(i).y << '\n';
  }
  for (std::size_t u = 0; u < graph.size(); ++u) {
    for (std::size_t v : graph.neighbors(u)) {
      if (u < v) out << "edge " << u << ' ' << v << '\n';
    }
  }
  out << "end\n";
}

Graph read_graph(std::istream& in) {
  LineReader r(in);
  return parse_graph(r, r.next("graph header"));
}

void write_model(std::ostream& out, const GnnModel& model) {
  out << "model " << model.feature_dim() << ' ' << model.hidden_dim() << '\n' << std::setprecision(17);
  for (Eigen::Index j = 0; j < model.theta.rows(); ++j) {
    out << "theta";
    for (Eigen::Index i = 0; i < model.theta.cols(); ++i) out << ' ' << model.theta(j, i);
    out << '\n';
  }
  out << 'w';
  for (Eigen::Index i = 0; i < model.w.size(); ++i) out << ' ' << model.w(i);
  out << "\nb " << model.b << "\nend\n";
}

GnnModel read_model(std::istream& in) {
  LineReader r(in);
  return parse_model(r, r.next("model header"));
}

void write_features(std::ostream& out, const BitMatrix& features) {
  out << "features " << features.rows() << ' ' << features.cols() << '\n';
  write_bit_rows(out, features);
}

BitMatrix read_features(std::istream& in) {
  LineReader r(in);
  return parse_features(r, r.next("features header"));
}

void write_instance(std::ostream& out, const Instance& inst) {
  out << "dgnn-instance\n";
  out << "filter " << to_string(inst.filter) << '\n';
  out << "node " << inst.node << '\n';
  write_graph(out, inst.graph);
  write_model(out, inst.model);
  write_features(out, inst.features);
  out << "received " << inst.received.rows() << ' ' << inst.received.cols() << '\n';
  write_bit_rows(out, inst.received);
  out << 'q';
  for (int q : inst.bound.q) out << ' ' << q;
  out << '\n';
}

Instance read_instance(std::istream& in) {
  LineReader r(in);
  auto t = r.next("instance");
  if (t.size() != 1 || t[0] != "dgnn-instance") r.fail("missing 'dgnn-instance' header");

  Instance inst;
  bool have_graph = false, have_model = false, have_features = false, have_received = false,
       have_q = false, have_node = false;
  while (auto line = r.try_next()) {
    const auto& key = (*line)[0];
    if (key == "filter" && line->size() == 2) {
      try {
        inst.filter = parse_filter_kind((*line)[1]);
      } catch (const std::invalid_argument& e) {
        r.fail(e.what());
      }
    } else if (key == "node" && line->size() == 2) {
      inst.node = to_index(r, (*line)[1]);
      have_node = true;
    } else if (key == "graph") {
      inst.graph = parse_graph(r, *line);
      have_graph = true;
    } else if (key == "model") {
      inst.model = parse_model(r, *line);
      have_model = true;
    } else if (key == "features") {
      inst.features = parse_features(r, *line);
      have_features = true;
    } else if (key == "received") {
      expect_header(r, *line, "received", 2);
      inst.received = read_bit_rows(r, to_index(r, (*line)[1]), to_index(r, (*line)[2]), "received");
      have_received = true;
    } else if (key == "q") {
      inst.bound.q.clear();
      for (std::size_t i = 1; i < line->size(); ++i) {
        const long long q = to_int(r, (*line)[i]);
        if (q < 0) r.fail("error budgets must be non-negative");
        inst.bound.q.push_back(static_cast<int>(q));
      }
      have_q = true;
    } else {
      r.fail("unknown instance key '" + key + "'");
    }
  }

  if (!have_graph || !have_model || !have_features || !have_node) {
    throw ParseError("instance needs node, graph, model and features sections");
  }
  if (inst.node >= inst.graph.size()) throw ParseError("instance node index out of range");
  if (static_cast<std::size_t>(inst.features.rows()) != inst.graph.size() ||
      static_cast<std::size_t>(inst.features.cols()) != inst.model.feature_dim()) {
    throw ParseError("features block must be n x p");
  }
  const std::size_t degree = inst.graph.degree(inst.node);
  if (!have_received) inst.received = gather_neighbor_rows(inst.graph, inst.node, inst.features);
  if (static_cast<std::size_t>(inst.received.rows()) != degree ||
      (degree > 0 && static_cast<std::size_t>(inst.received.cols()) != inst.model.feature_dim())) {
    throw ParseError("received block must have one row of p bits per neighbor");
  }
  if (!have_q) inst.bound = ErrorBound::uniform(degree, 0);
  if (inst.bound.q.size() != degree) {
    throw ParseError("q must list one budget per neighbor (" + std::to_string(degree) + ")");
  }
  return inst;
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open instance file '" + path + "'");
  return read_instance(in);
}

LocalView make_view(const Instance& inst) {
  LocalView view;
  view.slice = slice_filter(build_filter(inst.graph, inst.filter), inst.node, inst.graph);
  view.self = inst.features.row(static_cast<Eigen::Index>(inst.node)).transpose();
  view.received = inst.received;
  return view;
}

Instance random_tiny_instance(Rng& rng, int p, int max_degree, int max_q, int hidden) {
  std::uniform_int_distribution<int> degree_dist(std::min(1, max_degree), max_degree);
  std::uniform_int_distribution<int> q_dist(0, max_q);
  std::uniform_int_distribution<int> filter_dist(0, 2);
  std::uniform_int_distribution<int> hidden_dist(1, 8);
  std::bernoulli_distribution coin(0.5);

  const int degree = degree_dist(rng);
  const auto n = static_cast<std::size_t>(degree + 1);
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t u = 1; u < n; ++u) edges.emplace_back(0, u);
  // Extra edges among the leaves change the normalized filter weights.
  for (std::size_t u = 1; u < n; ++u) {
    for (std::size_t w = u + 1; w < n; ++w) {
      if (coin(rng)) edges.emplace_back(u, w);
    }
  }

  Instance inst;
  inst.graph = Graph::from_edges(n, edges);
  inst.filter = static_cast<FilterKind>(filter_dist(rng));
  inst.model = init_model(static_cast<std::size_t>(p),
                          static_cast<std::size_t>(hidden > 0 ? hidden : hidden_dist(rng)), rng);
  inst.features = init_features(n, static_cast<std::size_t>(p), rng);
  inst.node = 0;
  inst.received = gather_neighbor_rows(inst.graph, 0, inst.features);
  inst.bound.q.clear();
  for (int u = 0; u < degree; ++u) {
    const int q = std::min(q_dist(rng), p);
    inst.bound.q.push_back(q);
    // Corrupt up to q bits of the true row.
    std::uniform_int_distribution<int> flips(0, q);
    std::uniform_int_distribution<int> pos(0, p - 1);
    for (int f = flips(rng); f > 0; --f) inst.received(u, pos(rng)) ^= 1;
  }
  return inst;
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::sound: return "SOUND";
    case Verdict::gap: return "GAP";
    case Verdict::violation: return "VIOLATION";
  }
  return "UNKNOWN";
}

VerifyReport verify_instance(const Instance& inst) {
  const LocalView view = make_view(inst);
  const NodeForward fwd = forward_node(view.slice, view.self, view.received, inst.model);
  VerifyReport rep;
  rep.node = inst.node;
  rep.degree = view.degree();
  rep.label = fwd.c;
  rep.margin = fwd.margin;
  rep.certificate = dual_certificate(view, inst.bound, fwd.c, inst.model);
  rep.q_upper = solve_q_upper(view, fwd.c, inst.model).q_upper;
  return rep;
}

OracleReport oracle_instance(const Instance& inst, std::uint64_t cap) {
  OracleReport rep;
  rep.verify = verify_instance(inst);
  rep.oracle = brute_force_margin(make_view(inst), inst.bound, rep.verify.label, inst.model, cap);
  const double z = rep.verify.certificate.z_dot;
  const bool oracle_robust = rep.oracle.min_margin > 0.0 && rep.oracle.label_stable;
  if ((z > 0.0 && !oracle_robust) || z > rep.oracle.min_margin + kWeakDualitySlack) {
    rep.verdict = Verdict::violation;
  } else if (z <= 0.0 && oracle_robust) {
    rep.verdict = Verdict::gap;
  } else {
    rep.verdict = Verdict::sound;
  }
  return rep;
}

std::string format_report(const VerifyReport& rep) {
  std::ostringstream out;
  out << std::setprecision(12);
  const auto& b = rep.certificate.bounds;
  out << "node=" << rep.node << " degree=" << rep.degree
      << " label=" << (rep.label == Label::positive ? "+1" : "-1") << " margin=" << rep.margin
      << " z_dot=" << rep.certificate.z_dot << " robust=" << (rep.certificate.robust ? 1 : 0)
      << " q_upper=";
  if (rep.q_upper) {
    out << *rep.q_upper;
  } else {
    out << "none";
  }
  out << " i_plus=" << b.count(ReluRegime::active) << " i_minus=" << b.count(ReluRegime::inactive)
      << " i_mixed=" << b.count(ReluRegime::mixed);
  return out.str();
}

std::string format_report(const OracleReport& rep) {
  std::ostringstream out;
  out << std::setprecision(12);
  out << format_report(rep.verify) << " oracle_min=" << rep.oracle.min_margin
      << " patterns=" << rep.oracle.patterns << " verdict=" << to_string(rep.verdict);
  return out.str();
}

}  // namespace dgnn
