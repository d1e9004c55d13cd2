#include "topoproj/harness.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <thread>

#include "topoproj/errors.hpp"
#include "topoproj/io.hpp"

namespace topoproj {

namespace {

using nlohmann::json;

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  std::uint64_t z = h ^ (v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2));
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::filesystem::path prepare_out(const StudySpec& spec) {
  std::filesystem::path dir(spec.out_dir);
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "study.json") << json(spec).dump(2) << '\n';
  return dir;
}

std::ofstream open_csv(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw InvalidInput("cannot write '" + p.string() + "'");
  return out;
}

json aggregate_json(const Aggregate& a) {
  return {{"runs", a.runs},
          {"failed", a.failed},
          {"energy_mean", a.energy_mean},
          {"energy_std", a.energy_std},
          {"steps_mean", a.steps_mean},
          {"time_mean", a.time_mean},
          {"grad_norm_mean", a.grad_mean},
          {"success_rate", a.success_rate},
          {"violations_mean", a.violations_mean}};
}

bool any_failed(const std::vector<RunRow>& rows) {
  for (const auto& r : rows)
    if (r.failed) return true;
  return false;
}

VariantConfig custom(std::string label, bool mse, bool clip, bool phys, bool delta, bool curv,
                     bool cma) {
  VariantConfig v;
  v.label = std::move(label);
  v.use_mse = mse;
  v.use_grad_clip = clip;
  v.use_physics_init = phys;
  v.use_delta = delta;
  v.use_curvature = curv;
  v.use_cmaes = cma;
  return v;
}

}  // namespace

void StudySpec::validate() const {
  if (n_seeds < 1) throw InvalidInput("study: n_seeds must be at least 1");
  if (sizes.empty()) throw InvalidInput("study: sizes must not be empty");
  for (std::size_t n : sizes) {
    if (n < 2 || n > 64) throw InvalidInput("study: sizes must lie in [2, 64]");
  }
  if (budget < 1) throw InvalidInput("study: budget must be at least 1");
  if (study != StudyKind::Ablation && variants.empty()) {
    throw InvalidInput("study: at least one variant is required");
  }
}

StudySpec StudySpec::seeds_default() { return {}; }

StudySpec StudySpec::scaling_default() {
  StudySpec s;
  s.study = StudyKind::Scaling;
  s.sizes = {2, 4, 6, 8, 10, 12, 15, 20};
  s.variants = {VariantConfig::v2()};
  return s;
}

StudySpec StudySpec::ablation_default() {
  StudySpec s;
  s.study = StudyKind::Ablation;
  s.variants.clear();
  return s;
}

StudySpec StudySpec::trace_default() {
  StudySpec s;
  s.study = StudyKind::Trace;
  s.n_seeds = 1;
  s.variants = {VariantConfig::v2()};
  return s;
}

std::string to_string(StudyKind k) {
  switch (k) {
    case StudyKind::Seeds: return "seeds";
    case StudyKind::Scaling: return "scaling";
    case StudyKind::Ablation: return "ablation";
    case StudyKind::Trace: return "trace";
  }
  return "seeds";
}

StudyKind study_kind_from_string(const std::string& s) {
  if (s == "seeds") return StudyKind::Seeds;
  if (s == "scaling") return StudyKind::Scaling;
  if (s == "ablation") return StudyKind::Ablation;
  if (s == "trace") return StudyKind::Trace;
  throw InvalidInput("unknown study '" + s + "'");
}

void to_json(json& j, const VariantConfig& v) {
  j = {{"label", v.label},       {"use_mse", v.use_mse},
       {"use_grad_clip", v.use_grad_clip}, {"use_physics_init", v.use_physics_init},
       {"use_delta", v.use_delta}, {"use_curvature", v.use_curvature},
       {"use_cmaes", v.use_cmaes}};
}

void from_json(const json& j, VariantConfig& v) {
  const std::string label = j.at("label").get<std::string>();
  if (label == "baseline" || label == "v1" || label == "v2") {
    v = VariantConfig::from_name(label);
  } else {
    v = VariantConfig{};
    v.label = label;
  }
  v.use_mse = j.at("use_mse").get<bool>();
  v.use_grad_clip = j.at("use_grad_clip").get<bool>();
  v.use_physics_init = j.at("use_physics_init").get<bool>();
  v.use_delta = j.at("use_delta").get<bool>();
  v.use_curvature = j.at("use_curvature").get<bool>();
  v.use_cmaes = j.at("use_cmaes").get<bool>();
}

void to_json(json& j, const StudySpec& s) {
  j = {{"study", to_string(s.study)},
       {"sizes", s.sizes},
       {"n_seeds", s.n_seeds},
       {"variants", s.variants},
       {"budget", s.budget},
       {"master_seed", s.master_seed},
       {"out_dir", s.out_dir},
       {"workers", s.workers}};
}

void from_json(const json& j, StudySpec& s) {
  s.study = study_kind_from_string(j.at("study").get<std::string>());
  s.sizes = j.at("sizes").get<std::vector<std::size_t>>();
  s.n_seeds = j.at("n_seeds").get<std::size_t>();
  s.variants = j.at("variants").get<std::vector<VariantConfig>>();
  s.budget = j.at("budget").get<std::size_t>();
  s.master_seed = j.at("master_seed").get<std::uint64_t>();
  s.out_dir = j.value("out_dir", std::string{});
  s.workers = j.value("workers", std::size_t{0});
}

std::uint64_t instance_seed(std::uint64_t master, std::size_t n, std::size_t i) {
  return mix(mix(mix(0x746f706f70726f6aULL, master), n), i);
}

std::uint64_t solver_seed(std::uint64_t inst_seed, const VariantConfig& v) {
  return mix(inst_seed, v.toggle_mask());
}

Aggregate aggregate(const std::vector<RunRow>& rows) {
  Aggregate a;
  a.runs = rows.size();
  if (rows.empty()) return a;
  const auto k = static_cast<double>(rows.size());
  std::size_t ok = 0;
  for (const auto& r : rows) {
    a.energy_mean += r.energy;
    a.steps_mean += static_cast<double>(r.steps);
    a.time_mean += r.wall_time;
    a.grad_mean += r.grad_mean;
    a.violations_mean += r.violations;
    ok += r.success ? 1 : 0;
    a.failed += r.failed ? 1 : 0;
  }
  a.energy_mean /= k;
  a.steps_mean /= k;
  a.time_mean /= k;
  a.grad_mean /= k;
  a.violations_mean /= k;
  a.success_rate = static_cast<double>(ok) / k;
  if (rows.size() > 1) {
    double ss = 0.0;
    for (const auto& r : rows) ss += (r.energy - a.energy_mean) * (r.energy - a.energy_mean);
    a.energy_std = std::sqrt(ss / (k - 1.0));
  }
  return a;
}

RunRow run_cell(const VariantConfig& v, std::size_t n, std::size_t seed_index,
                std::uint64_t master_seed, std::size_t budget, const SolverOptions& options) {
  RunRow row;
  row.variant = v.label;
  row.n = n;
  row.seed_index = seed_index;
  row.instance_seed = instance_seed(master_seed, n, seed_index);
  row.solver_seed = solver_seed(row.instance_seed, v);
  try {
    const ProblemInstance inst = generate_instance(n, row.instance_seed);
    const SolveResult r = solve(inst, v, budget, row.solver_seed, options);
    row.energy = r.final_energy;
    row.steps = r.steps;
    row.success = r.success;
    row.failed = r.failed;
    row.wall_time = r.wall_time;
    row.grad_mean = r.grad_mean;
    row.violations = r.violations;
    row.error = r.error;
  } catch (const std::exception& e) {
    row.failed = true;
    row.success = false;
    row.energy = std::numeric_limits<double>::quiet_NaN();
    row.error = e.what();
  }
  return row;
}

std::vector<RunRow> run_grid(const std::vector<VariantConfig>& variants,
                             const std::vector<std::size_t>& sizes, std::size_t n_seeds,
                             std::uint64_t master_seed, std::size_t budget, std::size_t workers,
                             const SolverOptions& options) {
  struct Cell {
    std::size_t variant, size, seed;
  };
  std::vector<Cell> cells;
  for (std::size_t v = 0; v < variants.size(); ++v)
    for (std::size_t s = 0; s < sizes.size(); ++s)
      for (std::size_t i = 0; i < n_seeds; ++i) cells.push_back({v, s, i});

  std::vector<RunRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < cells.size(); k = next++) {
      const Cell& c = cells[k];
      rows[k] = run_cell(variants[c.variant], sizes[c.size], c.seed, master_seed, budget, options);
    }
  };

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, cells.size());
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return rows;
}

SeedStudyResult run_seed_study(const StudySpec& spec, const SolverOptions& options) {
  spec.validate();
  SeedStudyResult out;
  out.rows = run_grid(spec.variants, spec.sizes, spec.n_seeds, spec.master_seed, spec.budget,
                      spec.workers, options);
  out.any_failed = any_failed(out.rows);
  for (const auto& v : spec.variants) {
    std::vector<RunRow> mine;
    for (const auto& r : out.rows)
      if (r.variant == v.label) mine.push_back(r);
    out.summary[v.label] = aggregate(mine);
  }

  if (!spec.out_dir.empty()) {
    const auto dir = prepare_out(spec);
    auto csv = open_csv(dir / "seeds.csv");
    csv << "variant,seed,E_final,steps,success,wall_time\n";
    for (const auto& r : out.rows) {
      csv << r.variant << ',' << r.instance_seed << ',' << format_double(r.energy) << ','
          << r.steps << ',' << (r.success ? "true" : "false") << ','
          << format_double(r.wall_time) << '\n';
    }
    json summary = json::object();
    for (const auto& [label, agg] : out.summary) summary[label] = aggregate_json(agg);
    std::ofstream(dir / "seeds_summary.json") << summary.dump(2) << '\n';
  }
  return out;
}

double growth_exponent(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw InvalidInput("growth_exponent needs at least two matching points");
  }
  double mx = 0.0, my = 0.0;
  const auto k = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += std::log(xs[i]);
    my += std::log(ys[i]);
  }
  mx /= k;
  my /= k;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = std::log(xs[i]) - mx;
    sxy += dx * (std::log(ys[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

ScalingStudyResult run_scaling_study(const StudySpec& spec, const SolverOptions& options) {
  spec.validate();
  ScalingStudyResult out;
  const std::vector<VariantConfig> variant{spec.variants.front()};
  out.rows = run_grid(variant, spec.sizes, spec.n_seeds, spec.master_seed, spec.budget,
                      spec.workers, options);
  out.any_failed = any_failed(out.rows);

  std::vector<double> xs, ys;
  for (std::size_t n : spec.sizes) {
    std::vector<RunRow> mine;
    for (const auto& r : out.rows)
      if (r.n == n) mine.push_back(r);
    out.sizes.push_back({n, aggregate(mine)});
    xs.push_back(static_cast<double>(n));
    ys.push_back(std::max(out.sizes.back().agg.time_mean, 1e-12));
  }
  if (xs.size() >= 2) out.time_exponent = growth_exponent(xs, ys);

  if (!spec.out_dir.empty()) {
    const auto dir = prepare_out(spec);
    auto csv = open_csv(dir / "scaling.csv");
    csv << "n,energy_mean,energy_std,steps_mean,time_mean,grad_norm_mean,success_rate,"
           "violations_mean\n";
    for (const auto& s : out.sizes) {
      const Aggregate& a = s.agg;
      csv << s.n << ',' << format_double(a.energy_mean) << ',' << format_double(a.energy_std)
          << ',' << format_double(a.steps_mean) << ',' << format_double(a.time_mean) << ','
          << format_double(a.grad_mean) << ',' << format_double(a.success_rate) << ','
          << format_double(a.violations_mean) << '\n';
    }
  }
  return out;
}

std::vector<AblationRow> ablation_configurations() {
  std::vector<AblationRow> t;
  auto add = [&](std::string name, bool sub, VariantConfig v) {
    AblationRow row;
    row.configuration = name;
    row.subtractive = sub;
    row.variant = std::move(v);
    t.push_back(std::move(row));
  };
  add("baseline", false, VariantConfig::baseline());
  add("+mse", false, custom("+mse", true, false, false, false, false, false));
  add("+grad_clip", false, custom("+grad_clip", true, true, false, false, false, false));
  add("+physics_init", false, custom("+physics_init", true, true, true, false, false, false));
  add("+delta", false, custom("+delta", true, true, true, true, false, false));
  add("+curvature", false, custom("+curvature", true, true, true, true, true, false));
  VariantConfig full = VariantConfig::v2();
  full.label = "+cmaes";
  add("+cmaes", false, full);
  add("full-delta", true, custom("full-delta", true, true, true, false, true, true));
  add("full-curvature", true, custom("full-curvature", true, true, true, true, false, true));
  add("full-mse", true, custom("full-mse", false, true, true, true, true, true));
  return t;
}

AblationResult run_ablation(const StudySpec& spec, const SolverOptions& options) {
  spec.validate();
  AblationResult out;
  out.table = ablation_configurations();
  std::vector<VariantConfig> variants;
  for (const auto& row : out.table) variants.push_back(row.variant);
  const std::vector<std::size_t> size{spec.sizes.front()};
  out.rows = run_grid(variants, size, spec.n_seeds, spec.master_seed, spec.budget, spec.workers,
                      options);
  out.any_failed = any_failed(out.rows);

  double full_mean = 0.0;
  for (std::size_t i = 0; i < out.table.size(); ++i) {
    const std::vector<RunRow> mine(out.rows.begin() + static_cast<std::ptrdiff_t>(i * spec.n_seeds),
                                   out.rows.begin() +
                                       static_cast<std::ptrdiff_t>((i + 1) * spec.n_seeds));
    out.table[i].agg = aggregate(mine);
    if (out.table[i].configuration == "+cmaes") full_mean = out.table[i].agg.energy_mean;
  }
  for (std::size_t i = 0; i < out.table.size(); ++i) {
    AblationRow& row = out.table[i];
    if (row.subtractive) {
      row.delta_energy = row.agg.energy_mean - full_mean;
    } else if (i > 0) {
      row.delta_energy = out.table[i - 1].agg.energy_mean - row.agg.energy_mean;
    }
  }

  if (!spec.out_dir.empty()) {
    const auto dir = prepare_out(spec);
    auto csv = open_csv(dir / "ablation.csv");
    csv << "configuration,energy_mean,energy_std,steps_mean,success_rate,grad_norm_mean,"
           "delta_energy\n";
    for (const auto& row : out.table) {
      const Aggregate& a = row.agg;
      csv << row.configuration << ',' << format_double(a.energy_mean) << ','
          << format_double(a.energy_std) << ',' << format_double(a.steps_mean) << ','
          << format_double(a.success_rate) << ',' << format_double(a.grad_mean) << ','
          << format_double(row.delta_energy) << '\n';
    }
  }
  return out;
}

TraceResult run_trace(const StudySpec& spec, const SolverOptions& options) {
  spec.validate();
  const VariantConfig& v = spec.variants.front();
  const std::size_t n = spec.sizes.front();
  TraceResult out;
  out.instance_seed = instance_seed(spec.master_seed, n, 0);
  out.solver_seed = solver_seed(out.instance_seed, v);
  const ProblemInstance inst = generate_instance(n, out.instance_seed);
  out.result = solve(inst, v, spec.budget, out.solver_seed, options);

  if (!spec.out_dir.empty()) {
    const auto dir = prepare_out(spec);
    auto csv = open_csv(dir / "trace.csv");
    write_trace_csv(csv, out.result.trace);
    auto cma = open_csv(dir / "cma_history.csv");
    write_cma_history_csv(cma, out.result.cma_history);
  }
  return out;
}

}  // namespace topoproj
