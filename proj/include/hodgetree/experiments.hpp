// SPDX-License-Identifier: Apache-2.0

#ifndef HODGETREE_EXPERIMENTS_HPP
#define HODGETREE_EXPERIMENTS_HPP

#include <atomic>
#include <cstdio>
#include <mutex>
#include <optional>
#include <thread>

#include "hodgetree/aux_precond.hpp"
#include "hodgetree/dense_oracle.hpp"

namespace hodgetree {

struct ExperimentConfig {
  std::string command;  // hodge | poincare-constants | precond-study | mesh-info
  int dim = 2;
  std::vector<int> ladder;      // refinement levels N
  std::vector<int> k_list;      // degrees (defaulted per command)
  std::vector<int> alpha_exps = {-4, -3, -2, -1, 0};  // log10(alpha) grid
  std::uint64_t seed = 1;
  double tol = 1e-8;       // Krylov relative residual
  double eig_tol = 1e-10;  // eigenvalue estimator increment tolerance
  std::string out_path;    // empty -> stdout
  std::string format = "csv";
  bool dump_trees = false;
  bool dense_oracle = false;
  int jobs = 1;
  int kappa_cap = 20000;  // skip condition numbers above this many DOFs
  int reps = 3;           // timing repetitions (median reported)
  std::string mesh_path;        // mesh-info: read mesh instead of generating
  std::string write_mesh_path;  // mesh-info: export generated mesh
};

inline void validate(ExperimentConfig& cfg) {
  if (cfg.dim != 2 && cfg.dim != 3) throw InvalidArgument("config: dim must be 2 or 3");
  int n = cfg.dim;
  if (cfg.ladder.empty()) {
    if (cfg.command == "hodge" || cfg.command == "mesh-info")
      cfg.ladder = {n == 2 ? 16 : 8};
    else
      cfg.ladder = n == 2 ? std::vector<int>{4, 8, 16, 32, 64} : std::vector<int>{2, 4, 8, 12};
  }
  for (int N : cfg.ladder)
    if (N < 1) throw InvalidArgument("config: refinement levels must be >= 1");
  int klo = 1, khi = n;
  if (cfg.command == "poincare-constants") {
    klo = 0;
    khi = n - 1;
  } else if (cfg.command == "precond-study") {
    khi = n - 1;
  }
  if (cfg.k_list.empty()) {
    for (int k = klo; k <= khi; ++k) cfg.k_list.push_back(k);
  }
  for (int k : cfg.k_list)
    if (k < klo || k > khi)
      throw InvalidArgument("config: k = " + std::to_string(k) + " outside " +
                            std::to_string(klo) + ".." + std::to_string(khi) + " for " +
                            cfg.command);
  for (int e : cfg.alpha_exps)
    if (e > 0) throw InvalidArgument("config: alpha must satisfy 0 < alpha <= 1");
  if (cfg.format != "csv" && cfg.format != "json")
    throw InvalidArgument("config: format must be csv or json");
  if (cfg.jobs < 1) throw InvalidArgument("config: jobs must be >= 1");
  if (cfg.reps < 1) throw InvalidArgument("config: reps must be >= 1");
  if (!(cfg.tol > 0.0)) throw InvalidArgument("config: tol must be positive");
}

/// Mesh plus everything the experiments share for it.
struct MeshContext {
  MeshContext(int dim, int refine)
      : n(refine),
        mesh(dim == 2 ? generate_structured_square(refine) : generate_structured_cube(refine)),
        complex(mesh),
        partition(dof_partition(mesh)),
        poincare(complex, partition),
        h(mean_diameter(mesh)) {}

  explicit MeshContext(SimplicialMesh m)
      : n(0),
        mesh(std::move(m)),
        complex(mesh),
        partition(dof_partition(mesh)),
        poincare(complex, partition),
        h(mean_diameter(mesh)) {}

  int n;
  SimplicialMesh mesh;
  FormComplex complex;
  TreePartition partition;
  PoincareOperator poincare;
  double h;
};

namespace detail {

inline double median3(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

/// Run indexed tasks on up to `jobs` threads; results land in
/// caller-owned slots so output order is deterministic.
inline void parallel_for(int count, int jobs, const std::function<void(int)>& task) {
  if (jobs <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    while (true) {
      int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  int threads = std::min(jobs, count);
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

// --------------------------------------------------------------------------
// hodge: four-step vs monolithic timings

struct HodgeRow {
  int dim = 0;
  int n = 0;
  double h = 0.0;
  int k = 0;
  std::vector<SubproblemRecord> subproblems;  // median timings over reps
  int total_dofs = 0;
  double fourstep_seconds = 0.0;
  double monolithic_seconds = 0.0;
  int monolithic_iterations = 0;
  double speedup = 0.0;
  double residual_eq1 = 0.0;
  double residual_eq2 = 0.0;
  double solution_diff = 0.0;  // four-step vs monolithic, relative
};

inline HodgeRow run_hodge_cell(const MeshContext& ctx, int k, const ExperimentConfig& cfg) {
  const FormComplex& c = ctx.complex;
  HodgeRow row;
  row.dim = c.dim;
  row.n = ctx.n;
  row.h = ctx.h;
  row.k = k;

  std::uint64_t seed = cfg.seed * 1000003ull + static_cast<std::uint64_t>(k);
  Vector g = random_vector(static_cast<std::size_t>(c.dof_count(k - 1)), seed);
  Vector f = random_vector(static_cast<std::size_t>(c.dof_count(k)), seed + 1);
  HodgeLaplaceProblem problem(ctx.poincare, k, g, f);

  std::vector<std::vector<double>> sub_times;
  std::vector<double> mono_times;
  HodgeLaplaceSolution four, mono;
  for (int rep = 0; rep < cfg.reps; ++rep) {
    four = k == c.dim ? solve_k_equals_n(problem) : solve_four_step(problem);
    mono = solve_monolithic(problem, cfg.tol, SolveBackend::direct);
    if (sub_times.empty()) sub_times.resize(four.subproblems.size());
    for (std::size_t i = 0; i < four.subproblems.size(); ++i)
      sub_times[i].push_back(four.subproblems[i].seconds);
    mono_times.push_back(mono.total_seconds);
  }
  row.subproblems = four.subproblems;
  row.fourstep_seconds = 0.0;
  for (std::size_t i = 0; i < row.subproblems.size(); ++i) {
    row.subproblems[i].seconds = detail::median3(sub_times[i]);
    row.fourstep_seconds += row.subproblems[i].seconds;
  }
  row.monolithic_seconds = detail::median3(mono_times);
  row.monolithic_iterations = mono.subproblems.front().iterations;
  row.total_dofs = four.total_dofs;
  row.speedup = row.monolithic_seconds / std::max(row.fourstep_seconds, 1e-12);
  row.residual_eq1 = four.residual_eq1;
  row.residual_eq2 = four.residual_eq2;

  Vector dv = subtract(four.v, mono.v);
  Vector du = subtract(four.u, mono.u);
  double denom = std::max(norm2(mono.v) + norm2(mono.u), 1e-300);
  row.solution_diff = (norm2(dv) + norm2(du)) / denom;
  return row;
}

inline std::vector<HodgeRow> run_hodge(const ExperimentConfig& cfg) {
  std::vector<HodgeRow> rows;
  for (int N : cfg.ladder) {
    MeshContext ctx(cfg.dim, N);
    std::vector<HodgeRow> batch(cfg.k_list.size());
    detail::parallel_for(static_cast<int>(cfg.k_list.size()), cfg.jobs, [&](int i) {
      batch[static_cast<std::size_t>(i)] =
          run_hodge_cell(ctx, cfg.k_list[static_cast<std::size_t>(i)], cfg);
    });
    for (auto& r : batch) rows.push_back(std::move(r));
  }
  return rows;
}

// --------------------------------------------------------------------------
// poincare-constants

struct PoincareRow {
  int dim = 0;
  int n = 0;
  double h = 0.0;
  int k = 0;
  double cbar = 0.0;
  std::optional<double> cbar_dense;
  int iterations = 0;
};

inline std::vector<PoincareRow> run_poincare_constants(const ExperimentConfig& cfg) {
  std::vector<PoincareRow> rows;
  for (int N : cfg.ladder) {
    MeshContext ctx(cfg.dim, N);
    std::vector<PoincareRow> batch(cfg.k_list.size());
    detail::parallel_for(static_cast<int>(cfg.k_list.size()), cfg.jobs, [&](int i) {
      int k = cfg.k_list[static_cast<std::size_t>(i)];
      PoincareRow row;
      row.dim = cfg.dim;
      row.n = N;
      row.h = ctx.h;
      row.k = k;
      PoincareConstantResult pc =
          poincare_constant(ctx.complex, ctx.partition, k, cfg.eig_tol);
      row.cbar = pc.cbar;
      row.iterations = pc.iterations;
      int dofs = k == 0 ? ctx.complex.dof_count(0)
                        : ctx.partition.bar[static_cast<std::size_t>(k)].size();
      if (cfg.dense_oracle && dofs < 2000)
        row.cbar_dense = dense_poincare_constant(ctx.complex, ctx.partition, k);
      batch[static_cast<std::size_t>(i)] = row;
    });
    for (auto& r : batch) rows.push_back(std::move(r));
  }
  return rows;
}

// --------------------------------------------------------------------------
// precond-study

struct PrecondRow {
  int dim = 0;
  int n = 0;
  double h = 0.0;
  int k = 0;
  double alpha = 0.0;
  std::optional<double> kappa;  // skipped above the size cap
  int minres_iterations = 0;
};

inline std::vector<PrecondRow> run_precond_study(const ExperimentConfig& cfg) {
  std::vector<PrecondRow> rows;
  for (int N : cfg.ladder) {
    MeshContext ctx(cfg.dim, N);
    int cells = static_cast<int>(cfg.k_list.size() * cfg.alpha_exps.size());
    std::vector<PrecondRow> batch(static_cast<std::size_t>(cells));
    detail::parallel_for(cells, cfg.jobs, [&](int i) {
      int k = cfg.k_list[static_cast<std::size_t>(i) / cfg.alpha_exps.size()];
      int exp10 = cfg.alpha_exps[static_cast<std::size_t>(i) % cfg.alpha_exps.size()];
      double alpha = std::pow(10.0, exp10);
      PrecondRow row;
      row.dim = cfg.dim;
      row.n = N;
      row.h = ctx.h;
      row.k = k;
      row.alpha = alpha;
      ProjectionProblem problem(ctx.complex, k, alpha);
      AuxPreconditioner precond(ctx.complex, ctx.partition, k, alpha);
      if (ctx.complex.dof_count(k) <= cfg.kappa_cap)
        row.kappa = estimate_condition(problem, precond, 1e-6);
      std::uint64_t seed = cfg.seed * 1000003ull + static_cast<std::uint64_t>(i) +
                           static_cast<std::uint64_t>(N) * 101ull;
      Vector f = random_vector(static_cast<std::size_t>(ctx.complex.dof_count(k)), seed);
      PminresResult pm = pminres(problem, precond, f, cfg.tol);
      row.minres_iterations = pm.iterations;
      batch[static_cast<std::size_t>(i)] = row;
    });
    for (auto& r : batch) rows.push_back(std::move(r));
  }
  return rows;
}

// --------------------------------------------------------------------------
// mesh-info

struct MeshInfo {
  int dim = 0;
  int n = 0;
  std::vector<int> counts;
  int chi = 0;
  double h = 0.0;
  int node_tree_depth = 0;
  int dual_tree_depth = 0;
  std::vector<int> bar_dims;
  std::vector<int> ring_dims;
};

inline MeshInfo mesh_info(const MeshContext& ctx) {
  MeshInfo info;
  info.dim = ctx.mesh.dim();
  info.n = ctx.n;
  for (int k = 0; k <= info.dim; ++k) info.counts.push_back(ctx.mesh.count(k));
  info.chi = ctx.mesh.euler_characteristic();
  info.h = ctx.h;
  info.node_tree_depth = ctx.partition.node_tree.max_depth();
  info.dual_tree_depth = ctx.partition.dual_tree.max_depth();
  for (int k = 0; k <= info.dim; ++k) {
    info.bar_dims.push_back(ctx.partition.bar_dim(k));
    info.ring_dims.push_back(ctx.partition.ring_dim(k));
  }
  return info;
}

}  // namespace hodgetree

#endif
