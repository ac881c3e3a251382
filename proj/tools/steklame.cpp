// steklame: Steklov-Lame eigenvalues from the command line.
//
//   steklame solve      --domain square --n 10 [--k 1] [--lambda 1 --mu 1 --p 1 | --M a,b,c,d]
//   steklame converge   --domain square --n 4,8,16 [--reference-level 64]
//   steklame korn       --domain square --n 4,8,16
//   steklame regularity --theta-deg 270
//
// Exit codes: 0 ok, 1 usage or insufficient data, 2 eigensolver did not
// converge, 3 file IO, 4 a checked invariant failed.

#include "steklov/config.hpp"
#include "steklov/harness.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <utility>

using namespace steklov;
using nlohmann::json;

namespace {

enum Exit
{
   ok = 0,
   usage = 1,
   not_converged = 2,
   io_error = 3,
   invariant_failed = 4
};

struct IoError : std::runtime_error
{
   using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path)
{
   std::ifstream in(path, std::ios::binary);
   if (!in)
      throw IoError("cannot read '" + path + "'");
   std::ostringstream s;
   s << in.rdbuf();
   return s.str();
}

void write_file(const std::string& path, const std::string& text)
{
   std::ofstream out(path, std::ios::binary);
   if (!out || !(out << text))
      throw IoError("cannot write '" + path + "'");
}

std::shared_ptr<const Mesh> config_mesh(const RunConfig& cfg, int level)
{
   if (cfg.domain == "meshfile") {
      if (cfg.mesh.empty())
         throw ConfigError("--domain meshfile needs --mesh <path>");
      return std::make_shared<const Mesh>(read_mesh(read_file(cfg.mesh)));
   }
   return std::make_shared<const Mesh>(make_domain_mesh(parse_domain(cfg.domain), level));
}

BoundaryWeight config_weight(const RunConfig& cfg, int dim)
{
   if (cfg.matrix.empty())
      return BoundaryWeight::scalar(cfg.p);
   if (cfg.matrix.size() != static_cast<std::size_t>(dim * dim))
      throw ConfigError("--M needs " + std::to_string(dim * dim) + " entries for this domain");
   BoundaryWeight::Matrix3 m{};
   for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
         m[i][j] = cfg.matrix[i * dim + j];
   return BoundaryWeight::matrix(dim, m);
}

void require_domain(const RunConfig& cfg)
{
   if (cfg.domain.empty())
      throw ConfigError("--domain is required");
   if (cfg.domain != "meshfile" && cfg.levels.empty())
      throw ConfigError("--n is required");
}

void print_modes(const SteklovResult& r)
{
   std::printf("%5s  %12s  %12s  %12s\n", "index", "kappa", "w", "residual");
   for (std::size_t i = 0; i < r.modes.kappas.size(); ++i)
      std::printf("%5zu  %12.6f  %12.6f  %12.3e\n", i + 1, r.modes.kappas[i], r.modes.omegas[i],
                  r.modes.residuals[i]);
   std::printf("groups:");
   for (const auto& g : r.modes.multiplicity_groups)
      std::printf(" %zu", g.size());
   std::printf("\nzero modes: %d  angle to rigid motions: %.3e\n", r.zero_mode_count, r.zero_mode_angle);
   for (const auto& w : r.warnings)
      std::printf("warning: %s\n", w.c_str());
}

int cmd_solve(const RunConfig& cfg)
{
   require_domain(cfg);
   if (cfg.levels.size() > 1)
      throw ConfigError("solve takes a single --n");
   const int level = cfg.levels.empty() ? 0 : cfg.levels.front();
   SteklovProblem pb;
   pb.mesh = config_mesh(cfg, level);
   const int dim = pb.mesh->dim();
   pb.degree = cfg.degree;
   pb.material = ElasticMaterial(cfg.lambda, cfg.mu, dim);
   pb.weight = config_weight(cfg, dim);
   pb.n_eigs = cfg.n_eigs;
   pb.tol = cfg.tol;
   pb.seed = cfg.seed;

   const std::string out_path = cfg.output.empty()
                                  ? cfg.domain + "_n" + std::to_string(level) + "_k" + std::to_string(cfg.degree) +
                                      ".json"
                                  : cfg.output;
   SteklovResult res;
   int           code = ok;
   try {
      res = solve_steklov(pb);
   }
   catch (const EigenNotConverged& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      res.modes = e.partial();
      res.n_dofs = e.partial().vectors.empty() ? 0 : e.partial().vectors.front().size();
      res.h = pb.mesh->h();
      code = not_converged;
   }
   const std::string doc = result_json(cfg.domain, pb, res);
   write_file(out_path, doc);
   if (cfg.format == "json")
      std::cout << doc;
   else {
      std::printf("domain %s  N = %zu  h = %.6f  k = %d\n", cfg.domain.c_str(), res.n_dofs, res.h, cfg.degree);
      print_modes(res);
   }
   return code;
}

int cmd_converge(const RunConfig& cfg)
{
   require_domain(cfg);
   if (cfg.domain == "meshfile")
      throw ConfigError("converge needs a canonical domain");
   StudySettings s;
   s.domain = parse_domain(cfg.domain);
   s.degree = cfg.degree;
   s.levels = cfg.levels;
   s.reference_level = cfg.reference_level;
   s.reference_degree = cfg.reference_degree;
   s.lambda = cfg.lambda;
   s.mu = cfg.mu;
   s.p = cfg.p;
   s.n_eigs = cfg.n_eigs;
   s.tol = cfg.tol;
   s.seed = cfg.seed;
   if (!cfg.matrix.empty())
      throw ConfigError("converge supports the scalar weight only");

   const ConvergenceReport rep = run_convergence(s);
   const std::filesystem::path dir = cfg.output.empty() ? "." : cfg.output;
   std::error_code             ec;
   std::filesystem::create_directories(dir, ec);
   for (ReportFormat f : {ReportFormat::csv, ReportFormat::json, ReportFormat::svg})
      write_file((dir / report_file_name(rep, f)).string(), emit_report(rep, f));

   double slowest = std::numeric_limits<double>::infinity();
   for (double r : rep.rates)
      if (std::isfinite(r))
         slowest = std::min(slowest, r);

   if (cfg.format == "json")
      std::cout << emit_report(rep, ReportFormat::json);
   else {
      std::printf("%5s", "eig");
      for (const auto& l : rep.levels)
         std::printf("  %12s", ("N=" + std::to_string(l.n_dofs)).c_str());
      std::printf("  %12s  %8s\n", ("ref N=" + std::to_string(rep.reference.n_dofs)).c_str(), "rate");
      for (std::size_t j = 0; j < rep.rates.size(); ++j) {
         std::printf("%5zu", j + 1);
         for (const auto& l : rep.levels)
            std::printf("  %12.6f", l.kappas[j]);
         std::printf("  %12.6f  %8.4f\n", rep.reference.kappas[j], rep.rates[j]);
      }
      std::printf("slowest rate %.4f  predicted %.4f (r1 = %.4f, theta = %.4f deg)\n", slowest, rep.predicted_rate,
                  rep.r1, rep.theta * 180.0 / std::numbers::pi);
      if (rep.nested)
         std::printf("monotonicity: %s\n", rep.monotone ? "ok" : "FAILED");
      for (const auto& v : rep.violations)
         std::printf("violation: %s\n", v.c_str());
   }
   return rep.monotone ? ok : invariant_failed;
}

int cmd_korn(const RunConfig& cfg)
{
   require_domain(cfg);
   std::vector<int> levels = cfg.levels.empty() ? std::vector<int>{0} : cfg.levels;
   json             rows = json::array();
   bool             monotone = true;
   double           prev = 0.0;
   if (cfg.format != "json")
      std::printf("%6s  %8s  %14s  %14s  %14s\n", "level", "N", "C_h", "lambda_min", "alpha_h");
   for (std::size_t i = 0; i < levels.size(); ++i) {
      const auto           mesh = config_mesh(cfg, levels[i]);
      const KornEstimate   k = estimate_korn_constant(*mesh, cfg.degree);
      const ElasticMaterial mat(cfg.lambda, cfg.mu, mesh->dim());
      const double         p0 = config_weight(cfg, mesh->dim()).lower_bound();
      const double         alpha = k.alpha(mat, p0, mesh->dim());
      const std::size_t    n = build_space(*mesh, cfg.degree).n_dofs();
      if (i > 0 && k.c_h < prev - 1e-8)
         monotone = false;
      prev = k.c_h;
      rows.push_back({{"level", levels[i]}, {"n_dofs", n}, {"c_h", k.c_h}, {"lambda_min", k.lambda_min},
                      {"alpha_h", alpha}, {"form", k.form}});
      if (cfg.format != "json")
         std::printf("%6d  %8zu  %14.6f  %14.6f  %14.6f\n", levels[i], n, k.c_h, k.lambda_min, alpha);
   }
   if (cfg.format == "json")
      std::cout << json{{"domain", cfg.domain}, {"levels", rows}, {"monotone", monotone}}.dump(2) << '\n';
   else if (levels.size() > 1)
      std::printf("C_h nondecreasing: %s\n", monotone ? "ok" : "FAILED");
   return monotone ? ok : invariant_failed;
}

int cmd_regularity(const RunConfig& cfg)
{
   double theta = 0.0;
   if (cfg.theta_deg)
      theta = *cfg.theta_deg * std::numbers::pi / 180.0;
   else if (!cfg.domain.empty())
      theta = config_mesh(cfg, cfg.levels.empty() ? 4 : cfg.levels.front())->largest_boundary_angle();
   else
      throw ConfigError("regularity needs --theta-deg or --domain");
   const RegularityInfo info = regularity_root(theta);
   if (cfg.format == "json") {
      std::cout << json{{"theta", info.theta},
                        {"theta_deg", info.theta * 180.0 / std::numbers::pi},
                        {"r1", info.r1},
                        {"degenerate", info.degenerate},
                        {"residual", info.residual()},
                        {"predicted_rate_k1", info.predicted_rate(1)},
                        {"predicted_rate_k2", info.predicted_rate(2)}}
                     .dump(2)
                << '\n';
   }
   else {
      std::printf("theta = %.6f deg\n", info.theta * 180.0 / std::numbers::pi);
      std::printf("r1 = %.4f%s\n", info.r1, info.degenerate ? "  (straight boundary)" : "");
      std::printf("rate(k=1) = %.4f\nrate(k=2) = %.4f\n", info.predicted_rate(1), info.predicted_rate(2));
   }
   return ok;
}

struct FlagSpec
{
   const char* key;
   const char* help;
   bool        list;
};

const FlagSpec flag_specs[] = {
  {"domain", "square | lshape | disk | cube | meshfile", false},
  {"mesh", "mesh file for --domain meshfile", false},
  {"n", "mesh level(s): subdivisions, or boundary segments for the disk", true},
  {"k", "polynomial degree (1 or 2)", false},
  {"lambda", "Lame lambda", false},
  {"mu", "Lame mu", false},
  {"p", "scalar boundary weight", false},
  {"M", "matrix boundary weight, row-major", true},
  {"n-eigs", "number of nonzero eigenvalues", false},
  {"tol", "eigensolver tolerance", false},
  {"seed", "start-block seed", false},
  {"reference-level", "reference level for converge", false},
  {"reference-k", "reference degree for converge", false},
  {"theta-deg", "corner angle in degrees", false},
  {"format", "text | json", false},
  {"output", "result file (solve) or report directory (converge)", false},
};

} // namespace

int main(int argc, char** argv)
{
   CLI::App app{"Steklov-Lame eigenvalues with finite elements"};
   app.require_subcommand(1);

   std::map<std::string, std::vector<std::string>> values;
   std::map<std::string, CLI::Option*>             options;
   std::string                                     config_path;
   std::vector<CLI::App*>                          subs;
   const std::pair<const char*, const char*> commands[] = {
     {"solve", "eigenvalues on one mesh"},
     {"converge", "convergence study over several levels"},
     {"korn", "discrete Korn constants per level"},
     {"regularity", "regularity exponent of a corner angle"}};
   for (const auto& [name, description] : commands) {
      CLI::App* sub = app.add_subcommand(name, description);
      sub->add_option("--config", config_path, "file of key = value lines; flags win");
      for (const auto& f : flag_specs) {
         auto* opt = sub->add_option(std::string("--") + f.key, values[std::string(name) + "/" + f.key], f.help);
         if (f.list)
            opt->expected(1, CLI::detail::expected_max_vector_size);
         else
            opt->expected(1);
         options[std::string(name) + "/" + f.key] = opt;
      }
      subs.push_back(sub);
   }

   try {
      app.parse(argc, argv);
   }
   catch (const CLI::CallForHelp& e) {
      return app.exit(e);
   }
   catch (const CLI::CallForAllHelp& e) {
      return app.exit(e);
   }
   catch (const CLI::ParseError& e) {
      std::cerr << "error: " << e.what() << "\n\n" << app.help();
      return usage;
   }

   CLI::App* sub = nullptr;
   for (auto* s : subs)
      if (s->parsed())
         sub = s;
   const std::string name = sub->get_name();

   try {
      RunConfig cfg;
      if (!config_path.empty())
         cfg = parse_config(read_file(config_path));
      cfg.command = name;
      for (const auto& f : flag_specs) {
         const std::string key = name + "/" + f.key;
         if (options[key]->count() == 0)
            continue;
         std::string joined;
         for (const auto& v : values[key])
            joined += (joined.empty() ? "" : ",") + v;
         apply_setting(cfg, f.key, joined);
      }
      if (name == "solve")
         return cmd_solve(cfg);
      if (name == "converge")
         return cmd_converge(cfg);
      if (name == "korn")
         return cmd_korn(cfg);
      return cmd_regularity(cfg);
   }
   catch (const IoError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return io_error;
   }
   catch (const EigenNotConverged& e) {
      std::cerr << "error: " << e.what() << '\n';
      return not_converged;
   }
   catch (const InsufficientData& e) {
      std::cerr << "error: " << e.what() << '\n';
      return usage;
   }
   catch (const MeshParseError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return usage;
   }
   catch (const std::invalid_argument& e) {
      std::cerr << "error: " << e.what() << "\n\n" << sub->help();
      return usage;
   }
   catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return usage;
   }
}
