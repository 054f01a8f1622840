#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dgnn/experiment.hpp"
#include "dgnn/instance_io.hpp"

namespace {

// Exit codes; each failure also prints "error[<cause>]: <message>".
enum Exit : int {
  kOk = 0,
  kUsage = 2,
  kConfig = 3,
  kParse = 4,
  kIo = 5,
  kOracleCap = 6,
  kViolation = 7,
  kInternal = 8,
};

int fail(Exit code, const char* cause, const std::string& message) {
  std::cerr << "error[" << cause << "]: " << message << '\n';
  return code;
}

const char* kFormatHelp = R"(Instance file format ('#' comments and blank lines ignored):

  dgnn-instance
  filter <unnormalized|normalized|random_walk>
  node <v>
  graph <n>
  pos <i> <x> <y>          (optional, one per node)
  edge <u> <v>             (one per undirected edge)
  end
  model <p> <D>
  theta <D values>         (p lines)
  w <D values>
  b <value>
  end
  features <n> <p>
  <p chars of 0/1>         (n lines, true features)
  end
  received <deg> <p>       (optional; defaults to the true neighbor rows)
  <p chars of 0/1>         (deg lines, ascending neighbor index)
  end
  q <deg integers>         (optional; defaults to all zeros)
)";

const char* kConfigHelp = R"(Config file: one key=value per line, '#' starts a comment.
List-valued keys take comma-separated values. Worker threads: DGNN_WORKERS.
Keys: )";

std::string config_help() {
  std::string s = kConfigHelp;
  const auto& keys = dgnn::config_keys();
  for (std::size_t i = 0; i < keys.size(); ++i) s += (i ? ", " : "") + keys[i];
  return s + '\n';
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& sets,
            const std::string& out_path, bool full) {
  dgnn::ExperimentConfig config = full ? dgnn::full_profile() : dgnn::ExperimentConfig{};
  try {
    if (!config_path.empty()) dgnn::load_config_file(config, config_path);
    for (const auto& s : sets) dgnn::apply_assignment(config, s);
    dgnn::validate(config);
  } catch (const dgnn::ConfigError& e) {
    return fail(kConfig, "config", e.what());
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) return fail(kIo, "io", "cannot open output file '" + out_path + "'");
  const auto rows = dgnn::run_sweep(config, dgnn::workers_from_env());
  dgnn::write_csv(out, rows);
  out.flush();
  if (!out) return fail(kIo, "io", "failed writing '" + out_path + "'");
  return kOk;
}

int cmd_verify(const std::string& path) {
  const dgnn::Instance inst = dgnn::load_instance(path);
  std::cout << dgnn::format_report(dgnn::verify_instance(inst)) << '\n';
  return kOk;
}

int cmd_oracle(const std::string& path, std::uint64_t cap) {
  const dgnn::Instance inst = dgnn::load_instance(path);
  const dgnn::OracleReport report = dgnn::oracle_instance(inst, cap);
  std::cout << dgnn::format_report(report) << '\n';
  if (report.verdict == dgnn::Verdict::violation) {
    return fail(kViolation, "violation", "certificate claims robustness the oracle refutes");
  }
  return kOk;
}

int cmd_sample(std::uint64_t seed, int p, int degree, int q, const std::string& out_path) {
  dgnn::Rng rng = dgnn::substream(seed, 0x53414d50ULL);
  const dgnn::Instance inst = dgnn::random_tiny_instance(rng, p, degree, q);
  if (out_path.empty() || out_path == "-") {
    dgnn::write_instance(std::cout, inst);
    return kOk;
  }
  std::ofstream out(out_path);
  if (!out) return fail(kIo, "io", "cannot open output file '" + out_path + "'");
  dgnn::write_instance(out, inst);
  return out ? kOk : fail(kIo, "io", "failed writing '" + out_path + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized GNN inference over wireless links: sweeps and certificate checks"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  std::string out_path;
  bool full = false;
  auto* run = app.add_subcommand("run", "Run a parameter sweep and write CSV metrics");
  run->add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);
  run->add_option("--set", sets, "Override one config key (key=value), repeatable");
  run->add_option("--out", out_path, "Output CSV path")->required();
  run->add_flag("--full-profile", full, "Start from the full-scale profile (200 graphs, N<=200)");
  run->footer(config_help());

  std::string instance_path;
  auto* verify = app.add_subcommand("verify", "Certificate report for one serialized instance");
  verify->add_option("--instance", instance_path, "Instance file")->required();
  verify->footer(kFormatHelp);

  std::uint64_t cap = dgnn::kDefaultOracleCap;
  auto* oracle = app.add_subcommand("oracle", "Exhaustive check of the certificate on one instance");
  oracle->add_option("--instance", instance_path, "Instance file")->required();
  oracle->add_option("--cap", cap, "Maximum number of flip patterns to enumerate");
  oracle->footer(kFormatHelp);

  std::uint64_t seed = 1;
  int p = 4;
  int degree = 3;
  int q = 2;
  std::string sample_out;
  auto* sample = app.add_subcommand("sample", "Write a random small instance");
  sample->add_option("--seed", seed, "Random seed");
  sample->add_option("--p", p, "Feature dimension")->check(CLI::Range(1, 64));
  sample->add_option("--degree", degree, "Maximum neighbor count")->check(CLI::Range(0, 64));
  sample->add_option("--q", q, "Maximum per-neighbor bit budget")->check(CLI::Range(0, 64));
  sample->add_option("--out", sample_out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*run) return cmd_run(config_path, sets, out_path, full);
    if (*verify) return cmd_verify(instance_path);
    if (*oracle) return cmd_oracle(instance_path, cap);
    if (*sample) return cmd_sample(seed, p, degree, q, sample_out);
  } catch (const dgnn::ParseError& e) {
    return fail(kParse, "parse", e.what());
  } catch (const dgnn::OracleTooLarge& e) {
    return fail(kOracleCap, "oracle-cap", e.what());
  } catch (const dgnn::ConfigError& e) {
    return fail(kConfig, "config", e.what());
  } catch (const std::ios_base::failure& e) {
    return fail(kIo, "io", e.what());
  } catch (const std::exception& e) {
    return fail(kInternal, "internal", e.what());
  }
  return kUsage;
}
