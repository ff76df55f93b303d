#include "pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include <openssl/evp.h>

#include "cfrelax/initial_data.hpp"

namespace cfrelax::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string git_blob_sha1(std::string_view content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  const bool ok = ctx && EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &length) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("SHA-1 digest failed");
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < length; ++i) os << std::setw(2) << static_cast<int>(digest[i]);
  return os.str();
}

namespace {

std::string fmt(double x) { return format_double(x); }

// Shortest round-trip form, for human-facing parameter strings.
std::string brief(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string join(std::span<const double> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? " " : "") + brief(values[i]);
  return out;
}

double ratio(double num, double den) {
  if (den > 0.0) return num / den;
  return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

// Every file goes through here so the manifest can list it with its hash.
class Outputs {
 public:
  explicit Outputs(fs::path root) : root_(std::move(root)) {}

  void write(const std::string& relative, const std::string& content) {
    const fs::path path = root_ / relative;
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    if (!out) throw std::runtime_error("cannot write " + path.string());
    files_[relative] = {git_blob_sha1(content), content.size()};
  }

  json listing() const {
    json list = json::array();
    for (const auto& [path, entry] : files_)
      list.push_back({{"path", path}, {"sha1", entry.first}, {"bytes", entry.second}});
    return list;
  }

  std::vector<std::string> paths() const {
    std::vector<std::string> out;
    for (const auto& [path, entry] : files_) out.push_back(path);
    return out;
  }

  const fs::path& root() const { return root_; }

 private:
  fs::path root_;
  std::map<std::string, std::pair<std::string, std::size_t>> files_;
};

std::string report_csv(const RunReport& report) {
  std::ostringstream os;
  os << "step,t,dt,energy,constraint_dist\n";
  for (const auto& r : report.records)
    os << r.step << ',' << fmt(r.t) << ',' << fmt(r.dt) << ',' << fmt(r.energy) << ','
       << fmt(r.constraint_dist) << '\n';
  return os.str();
}

std::string field_csv(const Field& f) {
  std::ostringstream os;
  write_csv(f, os);
  return os.str();
}

// report.csv plus one CSV per snapshot under `prefix`; returns the snapshot
// index for the manifest.
json write_run(Outputs& out, const std::string& prefix, const RunReport& report) {
  out.write(prefix + "report.csv", report_csv(report));
  json snaps = json::array();
  for (std::size_t i = 0; i < report.snapshots.size(); ++i) {
    const std::string name = prefix + "snap_t" + std::to_string(i) + ".csv";
    out.write(name, field_csv(report.snapshots[i]));
    snaps.push_back({{"file", name}, {"t", report.snapshots[i].time()}});
  }
  return snaps;
}

json run_summary(const RunReport& report, const Grid& grid) {
  double dt = 0.0;
  for (const auto& r : report.records) dt = std::max(dt, r.dt);
  return {{"t", report.records.empty() ? 0.0 : report.records.back().t},
          {"epsilon", report.config.epsilon},
          {"eta", report.config.eta},
          {"h", grid.spacing()},
          {"dt", dt},
          {"steps", report.steps},
          {"complete", report.complete},
          {"error", report.error}};
}

void require_complete(const RunReport& report, const std::string& what) {
  if (!report.complete) throw std::runtime_error(what + " stopped early: " + report.error);
}

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string out;
  bool first = true;
  for (const auto& c : cells) {
    out += (first ? "" : ",") + c;
    first = false;
  }
  return out + "\n";
}

std::string verdicts_csv(const std::vector<Verdict>& verdicts) {
  std::string out = "check,parameters,value,budget,pass\n";
  for (const auto& v : verdicts)
    out += csv_row({v.check, v.parameters, fmt(v.value), fmt(v.budget), v.pass ? "1" : "0"});
  return out;
}

struct Context {
  const RunConfig& cfg;
  const Problem& problem;
  const Field& data;  // initial data before mollification
  std::ostream* log;
  Outputs& out;
  json studies = json::object();
  std::map<std::string, int> name_counts;

  // "study_epsilon" for the first, "study_epsilon_2" for the second, ...
  std::string file_stem(const std::string& base) {
    const int n = ++name_counts[base];
    return n == 1 ? base : base + "_" + std::to_string(n);
  }
};

Verdict energy_verdict(Context&, const RunReport& report) {
  const auto v = energy_check(report);
  return {"energy", "slack=1e-12", v.max_uptick, 1e-12, v.pass};
}

Verdict entropy_verdict(Context& ctx, const RunReport& report, const check::Entropy& spec) {
  const auto& sys = ctx.problem.system;
  const auto kappas = sample_kappas(ctx.problem.constraint);
  const auto phis = sample_test_functions(ctx.problem.grid, sys.speed_bound(), ctx.cfg.solver.final_time,
                                          ctx.cfg.seed, spec.bumps);
  std::string csv = "kappa,phi,value,budget,pass\n";
  double worst = std::numeric_limits<double>::infinity();
  bool pass = true;
  for (const auto& kappa : kappas) {
    for (const auto& phi : phis) {
      const auto r = entropy_residual(report.history, *report.initial, kappa, phi, sys, ctx.problem.constraint,
                                      spec.budget_constant);
      csv += csv_row({join(kappa), phi.describe(), fmt(r.value), fmt(r.budget), r.pass ? "1" : "0"});
      pass = pass && r.pass;
      const double margin = r.budget > 0.0 ? r.value / r.budget : (r.value >= 0.0 ? 0.0 : -INFINITY);
      worst = std::min(worst, margin);
    }
  }
  ctx.out.write(ctx.file_stem("check_entropy") + ".csv", csv);
  std::ostringstream params;
  params << "pairs=" << kappas.size() * phis.size() << " C=" << brief(spec.budget_constant) << " seed=" << ctx.cfg.seed;
  // value/budget of the tightest pair; the inequality holds while this stays >= -1
  return {"entropy", params.str(), std::isfinite(worst) ? worst : 0.0, -1.0, pass};
}

Verdict contraction_verdict(Context& ctx, const RunReport& report, const check::Contraction& spec) {
  SolverConfig solver = ctx.cfg.solver;
  solver.keep_history = true;
  const Field other_data = shift(ctx.data, {spec.shift, 0});
  const RunReport other = run(ctx.problem.system, ctx.problem.constraint, other_data, solver);
  require_complete(other, "shifted run");
  const std::string pair = ctx.file_stem("contraction_pair");
  ctx.studies[pair] = {{"run", run_summary(other, ctx.problem.grid)}, {"snapshots", write_run(ctx.out, pair + "/", other)}};

  const double tol = spec.local_tol.value_or(5.0 * ctx.problem.grid.spacing());
  const auto c = compare_runs(report, other, ctx.problem.system, spec.radii, tol);
  std::string csv = "t,radius,lhs,rhs,tolerance,pass\n";
  double worst = 0.0;
  for (const auto& row : c.rows) {
    csv += csv_row({fmt(row.t), std::isinf(row.radius) ? "inf" : fmt(row.radius), fmt(row.lhs), fmt(row.rhs),
                    fmt(row.tolerance), row.pass ? "1" : "0"});
    worst = std::max(worst, ratio(row.lhs, row.rhs * (1.0 + row.tolerance)));
  }
  ctx.out.write(ctx.file_stem("check_contraction") + ".csv", csv);
  return {"contraction", "shift=" + std::to_string(spec.shift) + " radii=" + join(spec.radii) + " tol=" + brief(tol),
          worst, 1.0, c.pass};
}

Verdict finite_speed_verdict(Context& ctx, const RunReport& report, const check::FiniteSpeed& spec) {
  const double r0 = spec.r0.value_or(support_radius(ctx.data));
  const double speed = ctx.problem.system.speed_bound();
  const auto f = finite_speed_check(report, r0, speed);
  std::string csv = "t,radius,outside,pass\n";
  double worst = 0.0;
  for (const auto& row : f.rows) {
    csv += csv_row({fmt(row.t), fmt(row.radius), fmt(row.outside), row.pass ? "1" : "0"});
    worst = std::max(worst, row.outside);
  }
  ctx.out.write(ctx.file_stem("check_finite_speed") + ".csv", csv);
  return {"finite_speed", "r0=" + brief(r0) + " L=" + brief(speed), worst, 1e-10 * l2_norm(*report.initial), f.pass};
}

Verdict epsilon_verdict(Context& ctx, const check::EpsilonStudy& spec) {
  const auto s = epsilon_cauchy_study(ctx.problem.system, ctx.problem.constraint, ctx.data, ctx.cfg.solver,
                                      spec.epsilons, region::Ball{spec.omega});
  const std::string stem = ctx.file_stem("study_epsilon");
  json runs = json::array();
  for (std::size_t i = 0; i < s.runs.size(); ++i) {
    const std::string dir = stem + "/eps_" + std::to_string(i) + "/";
    const json snaps = write_run(ctx.out, dir, s.runs[i]);
    runs.push_back({{"dir", dir}, {"run", run_summary(s.runs[i], ctx.problem.grid)}, {"snapshots", snaps}});
  }
  ctx.studies[stem] = {{"runs", runs}};
  for (const auto& r : s.runs) require_complete(r, "epsilon study run");

  std::string csv = "quantity,epsilon,epsilon_next,value\n";
  for (std::size_t i = 0; i < s.differences.size(); ++i)
    csv += csv_row({"difference", fmt(s.epsilons[i]), fmt(s.epsilons[i + 1]), fmt(s.differences[i])});
  for (std::size_t i = 0; i < s.max_violation.size(); ++i)
    csv += csv_row({"max_violation", fmt(s.epsilons[i]), "", fmt(s.max_violation[i])});
  ctx.out.write(stem + ".csv", csv);
  return {"epsilon_study", "epsilons=" + join(spec.epsilons) + " omega=" + brief(spec.omega),
          ratio(s.max_violation.back(), s.max_violation.front()), 0.1, s.pass};
}

Verdict eta_verdict(Context& ctx, const check::EtaStudy& spec) {
  const auto s = eta_study(ctx.problem.system, ctx.problem.constraint, ctx.data, ctx.cfg.solver, spec.etas,
                           region::Ball{spec.omega}, spec.final_ratio);
  std::string csv = "eta,distance\n";
  for (std::size_t i = 0; i < s.distances.size(); ++i) csv += csv_row({fmt(s.etas[i]), fmt(s.distances[i])});
  ctx.out.write(ctx.file_stem("study_eta") + ".csv", csv);
  return {"eta_study", "etas=" + join(spec.etas) + " omega=" + brief(spec.omega),
          ratio(s.distances.back(), s.distances.front()), spec.final_ratio, s.pass};
}

Verdict data_verdict(Context& ctx, const check::DataStudy& spec) {
  const auto s = l2_data_relaxation_study(ctx.problem.system, ctx.problem.constraint, ctx.data, ctx.cfg.solver,
                                          spec.widths);
  std::string csv = "width_a,width_b,quantity,value\n";
  double worst = 0.0;
  for (const auto& p : s.pairs) {
    csv += csv_row({fmt(p.width_a), fmt(p.width_b), "solution_distance", fmt(p.solution_distance)});
    csv += csv_row({fmt(p.width_a), fmt(p.width_b), "data_distance", fmt(p.data_distance)});
    worst = std::max(worst, ratio(p.solution_distance, p.data_distance));
  }
  ctx.out.write(ctx.file_stem("study_data") + ".csv", csv);
  return {"data_study", "widths=" + join(spec.widths), worst, 1.0, s.pass};
}

bool needs_history(const RunConfig& cfg) {
  return std::any_of(cfg.verify.begin(), cfg.verify.end(), [](const CheckSpec& c) {
    return std::holds_alternative<check::Entropy>(c) || std::holds_alternative<check::Contraction>(c) ||
           std::holds_alternative<check::FiniteSpeed>(c);
  });
}

const char* command_name(Command c) {
  switch (c) {
    case Command::Run: return "run";
    case Command::Study: return "study";
    case Command::Validate: return "validate";
  }
  return "run";
}

}  // namespace

ExecuteResult execute(const RunConfig& cfg, const ExecuteOptions& options) {
  ExecuteResult result;
  if (options.command == Command::Validate) {
    result.exit_code = kExitPass;
    return result;
  }
  const fs::path root = options.output_dir.empty() ? fs::path(cfg.output_dir) : options.output_dir;
  Outputs out(root);
  std::ostream* log = options.log;

  const std::string canonical = to_canonical_json(cfg);
  json manifest = {{"command", command_name(options.command)},
                   {"config", json::parse(canonical)},
                   {"config_hash", git_blob_sha1(canonical)},
                   {"complete", false},
                   {"error", ""}};

  try {
    const Problem problem = make_problem(cfg);
    const Field data = make_initial(problem.grid, cfg.initial);
    manifest["initial_in_constraint"] = constraint_distance(problem.constraint, data) <= 1e-12;
    Context ctx{cfg, problem, data, log, out, json::object(), {}};

    if (options.command == Command::Run) {
      SolverConfig solver = cfg.solver;
      solver.keep_history = needs_history(cfg);
      const RunReport report = run(problem.system, problem.constraint, data, solver);
      manifest["run"] = run_summary(report, problem.grid);
      manifest["snapshots"] = write_run(out, "", report);
      require_complete(report, "run");
      if (log) *log << "run: " << report.steps << " steps to t=" << fmt(report.records.back().t) << '\n';

      for (const auto& spec : cfg.verify) {
        std::visit(
            [&](const auto& c) {
              using T = std::decay_t<decltype(c)>;
              if constexpr (std::is_same_v<T, check::Energy>) result.verdicts.push_back(energy_verdict(ctx, report));
              else if constexpr (std::is_same_v<T, check::Entropy>)
                result.verdicts.push_back(entropy_verdict(ctx, report, c));
              else if constexpr (std::is_same_v<T, check::Contraction>)
                result.verdicts.push_back(contraction_verdict(ctx, report, c));
              else if constexpr (std::is_same_v<T, check::FiniteSpeed>)
                result.verdicts.push_back(finite_speed_verdict(ctx, report, c));
            },
            spec);
        if (log && !is_study(spec))
          *log << check_name(spec) << ": " << (result.verdicts.back().pass ? "PASS" : "FAIL") << '\n';
      }
    }
    for (const auto& spec : cfg.verify) {
      if (!is_study(spec)) continue;
      std::visit(
          [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, check::EpsilonStudy>) result.verdicts.push_back(epsilon_verdict(ctx, c));
            else if constexpr (std::is_same_v<T, check::EtaStudy>) result.verdicts.push_back(eta_verdict(ctx, c));
            else if constexpr (std::is_same_v<T, check::DataStudy>) result.verdicts.push_back(data_verdict(ctx, c));
          },
          spec);
      if (log) *log << check_name(spec) << ": " << (result.verdicts.back().pass ? "PASS" : "FAIL") << '\n';
    }
    if (!ctx.studies.empty()) manifest["studies"] = ctx.studies;
    manifest["complete"] = true;
    const bool all = std::all_of(result.verdicts.begin(), result.verdicts.end(), [](const Verdict& v) { return v.pass; });
    result.exit_code = all ? kExitPass : kExitCheckFailed;
  } catch (const std::exception& e) {
    result.error = e.what();
    result.exit_code = kExitError;
    manifest["error"] = result.error;
  }

  try {
    out.write("verdicts.csv", verdicts_csv(result.verdicts));
    manifest["exit_code"] = result.exit_code;
    manifest["outputs"] = out.listing();
    out.write("manifest.json", canonical_dump(manifest));
  } catch (const std::exception& e) {
    if (result.error.empty()) result.error = e.what();
    result.exit_code = kExitError;
  }
  result.outputs = out.paths();
  return result;
}

}  // namespace cfrelax::cli
