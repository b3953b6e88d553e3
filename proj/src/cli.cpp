#include "ajc/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <omp.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "ajc/committor.hpp"
#include "ajc/config.hpp"
#include "ajc/errors.hpp"
#include "ajc/galerkin.hpp"
#include "ajc/io.hpp"
#include "ajc/jumpchain.hpp"
#include "ajc/operators.hpp"
#include "ajc/oracle.hpp"

namespace ajc::cli {

namespace {

namespace fs = std::filesystem;

struct Common {
  std::string config;
  std::string preset;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  int threads = 0;
  bool count_survival = false;
  std::string tail;
};

void setup_logging() {
  static bool done = false;
  if (done) return;
  done = true;
  auto logger = spdlog::stderr_color_mt("ajc");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("AJC_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

RunConfig resolve_config(const Common& c) {
  if (!c.config.empty() && !c.preset.empty()) throw UsageError("give either --config or --preset, not both");
  if (c.config.empty() && c.preset.empty()) throw UsageError("one of --config or --preset is required");
  RunConfig rc = c.config.empty() ? preset_config(c.preset) : load_config(c.config);
  if (c.seed) rc.seed = *c.seed;
  if (c.count_survival) rc.coherence.count_survival = true;
  if (!c.tail.empty()) {
    if (c.tail == "absorb_to_b") rc.committor.tail = TailPolicy::to_b();
    else if (c.tail == "absorb_to_a") rc.committor.tail = TailPolicy::to_a();
    else {
      try {
        std::size_t used = 0;
        const double v = std::stod(c.tail, &used);
        if (used != c.tail.size()) throw std::invalid_argument("trailing characters");
        rc.committor.tail = TailPolicy::fixed(v);
      } catch (const std::exception&) {
        throw UsageError("--tail expects absorb_to_b, absorb_to_a or a value in [0, 1]");
      }
    }
  }
  return rc;
}

struct Problem {
  RateMatrixSequence seq;
  JumpMatrix j;
};

Problem build(const RunConfig& rc) {
  Problem p;
  p.seq = rc.problem.build();
  spdlog::info("generator: N={} M={}", p.seq.states(), p.seq.cells());
  p.j = assemble(p.seq);
  spdlog::info("assembled jump matrix: nnz={}", p.j.nnz());
  return p;
}

void cmd_assemble(const RunConfig& rc, const fs::path& out_dir, std::ostream& out) {
  const auto p = build(rc);
  io::write_jump_matrix(p.j, out_dir / "jump_matrix");
  const double dim = static_cast<double>(p.j.indexer().size());
  out << "N " << p.j.states() << '\n'
      << "M " << p.j.blocks() << '\n'
      << "dimension " << p.j.indexer().size() << '\n'
      << "nnz " << p.j.nnz() << '\n'
      << "sparsity " << fmt::format("{:.6f}", static_cast<double>(p.j.nnz()) / (dim * dim)) << '\n';
}

void cmd_sample(const RunConfig& rc, const fs::path& out_dir, std::ostream& out) {
  const auto p = build(rc);
  const auto& s = rc.sample;
  const auto& grid = p.seq.grid();
  if (s.state >= p.seq.states()) throw ConfigError(fmt::format("sample.state {} out of range", s.state));
  if (!grid.contains(s.time)) throw ConfigError("sample.time outside the time grid");
  const double horizon = s.horizon.value_or(grid.end());
  if (!(horizon >= s.time) || !grid.contains(horizon)) throw ConfigError("sample.horizon outside [time, t_M]");
  std::vector<TrajectorySample> paths;
  paths.reserve(s.trajectories);
  for (std::size_t n = 0; n < s.trajectories; ++n)
    paths.push_back(sample_trajectory(p.seq, {s.state, s.time}, horizon, stream_seed(rc.seed, n)));
  {
    auto f = io::open_output(out_dir / "trajectories.csv");
    io::write_trajectories_csv(f, paths);
  }
  const auto k = resolve_block(s.first_jump_block, p.j.blocks(), "sample.first_jump.block");
  if (s.first_jump_state >= p.seq.states()) throw ConfigError("sample.first_jump.state out of range");
  if (s.first_jump_samples == 0) throw ConfigError("sample.first_jump.samples must be positive");
  const auto counts =
      first_jump_counts(p.seq, s.first_jump_state, k, s.first_jump_samples, stream_seed(rc.seed, ~0ULL));
  auto f = io::open_output(out_dir / "first_jump.csv");
  f << "state,block,count,frequency,galerkin\n";
  const double total = static_cast<double>(counts.samples);
  const auto& idx = counts.indexer;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    const auto i = idx.state(a), l = idx.block(a);
    const double g = p.j.entry(s.first_jump_state, k, i, l);
    if (counts.counts[a] == 0 && g == 0.0) continue;
    f << i << ',' << l << ',' << counts.counts[a] << ',' << io::format_number(static_cast<double>(counts.counts[a]) / total)
      << ',' << io::format_number(g) << '\n';
  }
  f << "# survived " << counts.survived << ' '
    << io::format_number(static_cast<double>(counts.survived) / total) << ' '
    << io::format_number(p.j.closed_form_survival(idx.flat(s.first_jump_state, k))) << '\n';
  out << "trajectories " << paths.size() << '\n' << "first_jump_samples " << counts.samples << '\n';
}

void cmd_propagate(const RunConfig& rc, const fs::path& out_dir, std::ostream& out) {
  const auto p = build(rc);
  const auto fbar = rc.propagate.initial.resolve(p.j.states());
  const auto last = resolve_block(rc.propagate.block, p.j.blocks(), "propagate.block");
  const auto f0 = embed_initial(p.j, fbar);
  SpaceTimeVector activity;
  if (rc.propagate.method == ActivityMethod::series) {
    auto r = jump_activity(p.j, f0, rc.activity);
    spdlog::info("activity series: {} terms, residual {:.3e}", r.terms, r.residual);
    activity = std::move(r.activity);
  } else {
    activity = activity_solve(p.j, f0, rc.solver);
  }
  SpaceTimeVector density(p.j.indexer(), VectorKind::density);
  for (std::size_t l = 0; l < p.j.blocks(); ++l) {
    if (l > last) continue;
    const auto d = synchronize(p.j, activity, l);
    for (std::size_t i = 0; i < p.j.states(); ++i) density.at(i, l) = d[i];
  }
  {
    auto f = io::open_output(out_dir / "activity.csv");
    io::write_csv(f, activity, "activity");
  }
  auto f = io::open_output(out_dir / "density.csv");
  f << "state,block,density\n";
  for (std::size_t l = 0; l <= last; ++l)
    for (std::size_t i = 0; i < p.j.states(); ++i)
      f << i << ',' << l << ',' << io::format_number(density.at(i, l)) << '\n';
  double mass = 0.0;
  for (std::size_t i = 0; i < p.j.states(); ++i) mass += density.at(i, last);
  out << "block " << last << '\n' << "mass " << io::format_number(mass) << '\n';
}

void cmd_koopman(const RunConfig& rc, const fs::path& out_dir, std::ostream& out) {
  const auto p = build(rc);
  const auto g = rc.koopman.observable.resolve(p.j.states());
  const auto l = resolve_block(rc.koopman.block, p.j.blocks(), "koopman.block");
  const auto k = koopman_solve(p.j, g, l, rc.solver);
  auto f = io::open_output(out_dir / "koopman.csv");
  io::write_csv(f, k, "koopman");
  out << "block " << l << '\n';
}

void cmd_committor(const RunConfig& rc, const fs::path& out_dir, std::ostream& out) {
  const auto p = build(rc);
  if (!rc.committor.a) throw ConfigError("committor.A is required");
  const auto a = rc.committor.a->resolve(p.j.indexer());
  const auto b = rc.committor.b ? rc.committor.b->resolve(p.j.indexer()) : SpaceTimeSet(p.j.indexer());
  const auto c = committor_solve(p.j, a, b, rc.committor.tail, rc.solver);
  auto f = io::open_output(out_dir / "committor.csv");
  io::write_csv(f, c, "committor");
  out << "A " << a.count() << '\n' << "B " << b.count() << '\n';
}

void cmd_coherence(const RunConfig& rc, const fs::path& out_dir, std::ostream& out) {
  const auto p = build(rc);
  if (!rc.coherence.c) throw ConfigError("coherence.C is required");
  const auto set = rc.coherence.c->resolve(p.j.indexer());
  const auto defect = coherence_defect(p.j, set, rc.coherence.count_survival);
  SpaceTimeVector ind(p.j.indexer(), VectorKind::observable);
  for (std::size_t a = 0; a < ind.values.size(); ++a) ind.values[a] = set.contains_flat(a) ? 1.0 : 0.0;
  const auto pulled = apply_adjoint(p.j, ind);
  auto f = io::open_output(out_dir / "coherence.csv");
  f << "state,block,stay\n";
  for (std::size_t a = 0; a < ind.values.size(); ++a) {
    if (!set.contains_flat(a)) continue;
    double stay = pulled.values[a];
    if (rc.coherence.count_survival) stay += p.j.survival_mass(a);
    f << p.j.indexer().state(a) << ',' << p.j.indexer().block(a) << ',' << io::format_number(stay) << '\n';
  }
  out << "min_slack " << io::format_number(defect.min_slack) << '\n'
      << "violation_mass " << io::format_number(defect.violation_mass) << '\n'
      << "coherent " << (defect.coherent() ? "yes" : "no") << '\n';
}

void cmd_convergence(const RunConfig& rc, const fs::path& out_dir, std::ostream& out) {
  const auto builder = rc.problem.builder();
  if (!builder) throw ConfigError("convergence needs a preset or sqra problem (file generators cannot be refined)");
  const auto& grid = rc.problem.grid;
  auto dts = rc.convergence.dt;
  if (dts.empty())
    for (double dt = 1.0; dt >= 1.0 / 32.0; dt /= 2.0) dts.push_back(dt);
  const auto study = convergence_study(*builder, grid.start(), grid.end(), rc.problem.switch_times(), dts);
  {
    auto f = io::open_output(out_dir / "convergence.csv");
    io::write_convergence_csv(f, study);
  }
  for (const auto& r : study.rows)
    out << fmt::format("dt {:<10g} cells {:<4} nnz {:<8} eps2 {:.6e} epsF {:.6e}\n", r.dt, r.cells, r.nnz,
                       r.error.spectral, r.error.frobenius);
  if (study.slope) out << fmt::format("slope {:.4f}\n", *study.slope);
  out << "monotone " << (study.monotone ? "yes" : "no") << '\n';
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  setup_logging();
  CLI::App app{"Space-time jump chain toolkit for piecewise-constant rate matrices", "ajc"};
  app.require_subcommand(1);
  Common common;
  using Handler = void (*)(const RunConfig&, const fs::path&, std::ostream&);
  struct Command {
    const char* name;
    const char* help;
    Handler handler;
  };
  const Command commands[] = {
      {"assemble", "Assemble the jump matrix and write it as MatrixMarket + JSON", cmd_assemble},
      {"sample", "Sample trajectories and first-jump cell frequencies", cmd_sample},
      {"propagate", "Propagate an initial density through the jump chain", cmd_propagate},
      {"koopman", "Solve the Koopman problem for an observable", cmd_koopman},
      {"committor", "Committor between space-time sets A and B", cmd_committor},
      {"coherence", "Forward-coherence defect of a space-time set", cmd_coherence},
      {"convergence", "Refinement study against the matrix-exponential oracle", cmd_convergence},
  };
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", common.config, "JSON run configuration");
    sub->add_option("--preset", common.preset, "Built-in problem instead of a config")
        ->check(CLI::IsMember({"two-state", "triple-well"}));
    sub->add_option("--out", common.out, "Output directory")->capture_default_str();
    sub->add_option("--seed", common.seed, "Random seed (overrides the config)");
    sub->add_option("--threads", common.threads, "OpenMP threads (0 keeps the default)")->check(CLI::NonNegativeNumber);
    if (std::string_view(c.name) == "coherence")
      sub->add_flag("--count-survival", common.count_survival, "Count never jumping again as staying in C");
    if (std::string_view(c.name) == "committor")
      sub->add_option("--tail", common.tail, "Tail policy: absorb_to_b, absorb_to_a or a value in [0, 1]");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  const CLI::App* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  try {
    const auto rc = resolve_config(common);
    if (common.threads > 0) omp_set_num_threads(common.threads);
    for (const auto& c : commands)
      if (name == c.name) c.handler(rc, fs::path(common.out), out);
    return kExitOk;
  } catch (const UsageError& e) {
    err << "ajc " << name << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const NonConvergence& e) {
    err << "ajc " << name << ": solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const ConfigError& e) {
    err << "ajc " << name << ": config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "ajc " << name << ": invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::out_of_range& e) {
    err << "ajc " << name << ": invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "ajc " << name << ": solver failure: " << e.what() << '\n';
    return kExitSolver;
  }
}

}  // namespace ajc::cli
