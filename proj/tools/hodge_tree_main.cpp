// SPDX-License-Identifier: Apache-2.0
//
// hodge-tree: command-line harness around the spanning-tree Poincare
// operator library. Subcommands reproduce the solver timing, Poincare
// constant and preconditioner studies at desk scale and expose mesh and
// partition dumps.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hodgetree/hodgetree.hpp"

namespace {

using nlohmann::json;
using namespace hodgetree;

std::string fmt(double v, const char* spec = "%.6e") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream os(path);
  if (!os) throw InvalidArgument("cannot open output file: " + path);
  os << content;
}

std::string hodge_csv(const std::vector<HodgeRow>& rows) {
  std::ostringstream os;
  os << "dim,N,h,k,prob1_dofs,prob1_seconds,prob2_dofs,prob2_seconds,prob3_dofs,"
        "prob3_seconds,prob4_dofs,prob4_seconds,total_dofs,fourstep_seconds,"
        "monolithic_seconds,speedup,residual_eq1,residual_eq2\n";
  for (const auto& r : rows) {
    os << r.dim << "," << r.n << "," << fmt(r.h) << "," << r.k;
    for (const auto& s : r.subproblems) os << "," << s.dofs << "," << fmt(s.seconds);
    os << "," << r.total_dofs << "," << fmt(r.fourstep_seconds) << ","
       << fmt(r.monolithic_seconds) << "," << fmt(r.speedup) << ","
       << fmt(r.residual_eq1) << "," << fmt(r.residual_eq2) << "\n";
  }
  return os.str();
}

json hodge_json(const std::vector<HodgeRow>& rows, const ExperimentConfig& cfg) {
  json out = json::array();
  for (const auto& r : rows) {
    json subs = json::array();
    for (const auto& s : r.subproblems)
      subs.push_back({{"name", s.name},
                      {"dofs", s.dofs},
                      {"seconds", s.seconds},
                      {"iterations", s.iterations}});
    out.push_back({{"k", r.k},
                   {"dim", r.dim},
                   {"mesh", (cfg.dim == 2 ? "square-N" : "cube-N") + std::to_string(r.n)},
                   {"h", r.h},
                   {"subproblems", subs},
                   {"total_dofs", r.total_dofs},
                   {"fourstep_seconds", r.fourstep_seconds},
                   {"monolithic_seconds", r.monolithic_seconds},
                   {"speedup", r.speedup},
                   {"residual_eq1", r.residual_eq1},
                   {"residual_eq2", r.residual_eq2}});
  }
  return out;
}

std::string poincare_csv(const std::vector<PoincareRow>& rows) {
  std::ostringstream os;
  os << "dim,N,h,k,cbar,cbar_dense,iterations\n";
  for (const auto& r : rows) {
    os << r.dim << "," << r.n << "," << fmt(r.h) << "," << r.k << "," << fmt(r.cbar) << ",";
    if (r.cbar_dense) os << fmt(*r.cbar_dense);
    os << "," << r.iterations << "\n";
  }
  return os.str();
}

json poincare_json(const std::vector<PoincareRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    json row = {{"dim", r.dim}, {"N", r.n},         {"h", r.h},
                {"k", r.k},     {"cbar", r.cbar},   {"iterations", r.iterations}};
    if (r.cbar_dense) row["cbar_dense"] = *r.cbar_dense;
    out.push_back(row);
  }
  return out;
}

std::string precond_csv(const std::vector<PrecondRow>& rows) {
  std::ostringstream os;
  os << "dim,N,h,k,alpha,kappa,minres_iters\n";
  for (const auto& r : rows) {
    os << r.dim << "," << r.n << "," << fmt(r.h) << "," << r.k << "," << fmt(r.alpha) << ",";
    if (r.kappa) os << fmt(*r.kappa);
    os << "," << r.minres_iterations << "\n";
  }
  return os.str();
}

json precond_json(const std::vector<PrecondRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    json row = {{"dim", r.dim},     {"N", r.n}, {"h", r.h},
                {"k", r.k},         {"alpha", r.alpha},
                {"minres_iters", r.minres_iterations}};
    if (r.kappa) row["kappa"] = *r.kappa;
    out.push_back(row);
  }
  return out;
}

void dump_trees_if_requested(const ExperimentConfig& cfg, const MeshContext& ctx,
                             const std::string& tag) {
  if (!cfg.dump_trees) return;
  std::string base = cfg.out_path.empty() ? std::string("partition") : cfg.out_path;
  std::string path = base + "." + tag + ".trees";
  std::ofstream os(path);
  if (!os) throw InvalidArgument("cannot open partition dump: " + path);
  write_partition(ctx.partition, ctx.mesh.dim(), os);
}

int run(ExperimentConfig cfg) {
  validate(cfg);

  if (cfg.command == "mesh-info") {
    std::unique_ptr<MeshContext> ctx;
    if (!cfg.mesh_path.empty()) {
      std::ifstream is(cfg.mesh_path);
      if (!is) throw InvalidArgument("cannot open mesh file: " + cfg.mesh_path);
      ctx = std::make_unique<MeshContext>(read_mesh(is));
    } else {
      ctx = std::make_unique<MeshContext>(cfg.dim, cfg.ladder.front());
    }
    if (!cfg.write_mesh_path.empty()) {
      std::ofstream os(cfg.write_mesh_path);
      if (!os) throw InvalidArgument("cannot open mesh output: " + cfg.write_mesh_path);
      write_mesh(ctx->mesh, os);
    }
    MeshInfo info = mesh_info(*ctx);
    std::ostringstream os;
    if (cfg.format == "json") {
      json j = {{"dim", info.dim},
                {"N", info.n},
                {"counts", info.counts},
                {"chi", info.chi},
                {"h", info.h},
                {"node_tree_depth", info.node_tree_depth},
                {"dual_tree_depth", info.dual_tree_depth},
                {"bar_dims", info.bar_dims},
                {"ring_dims", info.ring_dims}};
      os << j.dump(2) << "\n";
    } else {
      os << "dim " << info.dim << "\n";
      os << "counts";
      for (int c : info.counts) os << " " << c;
      os << "\nchi " << info.chi << "\n";
      os << "h " << fmt(info.h, "%.12g") << "\n";
      os << "node_tree_depth " << info.node_tree_depth << "\n";
      os << "dual_tree_depth " << info.dual_tree_depth << "\n";
      os << "bar_dims";
      for (int d : info.bar_dims) os << " " << d;
      os << "\nring_dims";
      for (int d : info.ring_dims) os << " " << d;
      os << "\n";
    }
    write_output(cfg.out_path, os.str());
    dump_trees_if_requested(cfg, *ctx, "N" + std::to_string(info.n));
    return 0;
  }

  if (cfg.command == "hodge") {
    auto rows = run_hodge(cfg);
    write_output(cfg.out_path, cfg.format == "json" ? hodge_json(rows, cfg).dump(2) + "\n"
                                                    : hodge_csv(rows));
    return 0;
  }
  if (cfg.command == "poincare-constants") {
    auto rows = run_poincare_constants(cfg);
    write_output(cfg.out_path,
                 cfg.format == "json" ? poincare_json(rows).dump(2) + "\n" : poincare_csv(rows));
    return 0;
  }
  if (cfg.command == "precond-study") {
    auto rows = run_precond_study(cfg);
    write_output(cfg.out_path,
                 cfg.format == "json" ? precond_json(rows).dump(2) + "\n" : precond_csv(rows));
    return 0;
  }
  throw InvalidArgument("unknown command: " + cfg.command);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "hodge-tree: spanning-tree Poincare operators, the four-step Hodge-Laplace\n"
      "solver and the auxiliary-space preconditioner for weighted projections.\n\n"
      "CSV schemas (frozen):\n"
      "  hodge:              dim,N,h,k,prob{1..4}_dofs,prob{1..4}_seconds,total_dofs,\n"
      "                      fourstep_seconds,monolithic_seconds,speedup,residual_eq1,\n"
      "                      residual_eq2\n"
      "  poincare-constants: dim,N,h,k,cbar,cbar_dense,iterations\n"
      "  precond-study:      dim,N,h,k,alpha,kappa,minres_iters\n"};
  app.require_subcommand(1);

  ExperimentConfig cfg;
  if (const char* env = std::getenv("HODGE_TREE_THREADS")) cfg.jobs = std::atoi(env);

  int refine = 0;
  std::string ladder_spec;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--dim", cfg.dim, "spatial dimension (2 or 3)");
    sub->add_option("--refine", refine, "single refinement level N");
    sub->add_option("--ladder", ladder_spec, "comma-separated refinement levels");
    sub->add_option("--k", cfg.k_list, "form degrees (comma separated)")->delimiter(',');
    sub->add_option("--alpha-exp", cfg.alpha_exps, "log10(alpha) grid, e.g. -4,-2,0")
        ->delimiter(',');
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_option("--tol", cfg.tol, "Krylov relative residual tolerance");
    sub->add_option("--out", cfg.out_path, "output path (default stdout)");
    sub->add_option("--format", cfg.format, "csv or json");
    sub->add_flag("--dump-trees", cfg.dump_trees, "export the DOF partition and trees");
    sub->add_flag("--dense-oracle", cfg.dense_oracle,
                  "cross-check constants against dense eigensolves (< 2000 DOFs)");
    sub->add_option("--jobs", cfg.jobs, "max concurrent cells (HODGE_TREE_THREADS fallback)");
    sub->add_option("--kappa-cap", cfg.kappa_cap,
                    "skip condition numbers above this many DOFs");
    sub->add_option("--reps", cfg.reps, "timing repetitions (median reported)");
  };

  CLI::App* hodge = app.add_subcommand("hodge", "four-step vs monolithic Hodge-Laplace solves");
  CLI::App* poincare =
      app.add_subcommand("poincare-constants", "Poincare constants over a mesh ladder");
  CLI::App* precond =
      app.add_subcommand("precond-study", "auxiliary-space preconditioner performance");
  CLI::App* meshinfo = app.add_subcommand("mesh-info", "mesh counts, trees and partitions");
  for (CLI::App* sub : {hodge, poincare, precond, meshinfo}) add_common(sub);
  meshinfo->add_option("--mesh", cfg.mesh_path, "read an ASCII mesh file instead of generating");
  meshinfo->add_option("--write-mesh", cfg.write_mesh_path, "export the mesh in ASCII format");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  cfg.command = app.get_subcommands().front()->get_name();
  try {
    if (!ladder_spec.empty()) {
      cfg.ladder.clear();
      std::stringstream ss(ladder_spec);
      std::string tok;
      while (std::getline(ss, tok, ',')) cfg.ladder.push_back(std::stoi(tok));
    } else if (refine > 0) {
      cfg.ladder = {refine};
    }
    return run(std::move(cfg));
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 2;
  }
}
