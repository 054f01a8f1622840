#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "dgnn/certify.hpp"
#include "dgnn/gnn.hpp"
#include "dgnn/graph.hpp"

namespace dgnn {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Text formats. Blank lines and '#' comments are ignored everywhere.
//
//   graph <n>                 model <p> <D>             features <n> <p>
//   pos <i> <x> <y>           theta <D values>  (p x)   <p chars of 0/1>  (n x)
//   edge <u> <v>              w <D values>              end
//   end                       b <value>
//                             end
void write_graph(std::ostream& out, const Graph& graph);
Graph read_graph(std::istream& in);
void write_model(std::ostream& out, const GnnModel& model);
GnnModel read_model(std::istream& in);
void write_features(std::ostream& out, const BitMatrix& features);
BitMatrix read_features(std::istream& in);

// One verification problem: the whole graph and model, the node under test,
// what it received from its neighbors and the per-neighbor error budget.
//
//   dgnn-instance
//   filter <unnormalized|normalized|random_walk>
//   node <v>
//   graph ... end
//   model ... end
//   features ... end          (true features; row v is x_v)
//   received <deg> <p>        (rows aligned with ascending neighbor index)
//   <p chars of 0/1>
//   end
//   q <deg integers>
struct Instance {
  Graph graph;
  FilterKind filter = FilterKind::unnormalized;
  GnnModel model;
  BitMatrix features;
  std::size_t node = 0;
  BitMatrix received;
  ErrorBound bound;
};

void write_instance(std::ostream& out, const Instance& instance);
Instance read_instance(std::istream& in);
Instance load_instance(const std::string& path);

LocalView make_view(const Instance& instance);

// Star-shaped random instance: node 0 with 1..max_degree neighbors, a
// random model, received rows within the drawn budgets of the true rows.
Instance random_tiny_instance(Rng& rng, int p, int max_degree, int max_q, int hidden = 0);

struct VerifyReport {
  std::size_t node = 0;
  std::size_t degree = 0;
  Label label = Label::positive;
  double margin = 0.0;
  Certificate certificate;
  std::optional<int> q_upper;
};

enum class Verdict { sound, gap, violation };

std::string_view to_string(Verdict verdict);

struct OracleReport {
  VerifyReport verify;
  OracleResult oracle;
  Verdict verdict = Verdict::sound;
};

inline constexpr double kWeakDualitySlack = 1e-9;

VerifyReport verify_instance(const Instance& instance);
OracleReport oracle_instance(const Instance& instance, std::uint64_t cap = kDefaultOracleCap);

// Single machine-readable key=value line.
std::string format_report(const VerifyReport& report);
std::string format_report(const OracleReport& report);

}  // namespace dgnn
