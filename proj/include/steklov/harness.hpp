#pragma once

#include "steklov/problem.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace steklov {

enum class Domain
{
   square,
   lshape,
   disk,
   cube
};

std::string domain_name(Domain d);
Domain parse_domain(const std::string& name);
int domain_dim(Domain d);

/// Canonical mesh of a domain at a level: subdivisions per unit for the
/// square, L-shape and cube; boundary segments for the disk polygon.
Mesh make_domain_mesh(Domain d, int level);

class InsufficientData : public std::invalid_argument
{
 public:
   using std::invalid_argument::invalid_argument;
};

/// Least-squares slope of log(error) against log(h). Zero errors are dropped;
/// fewer than two usable pairs throws InsufficientData.
double fit_rate(std::span<const double> hs, std::span<const double> errors);

/// Tabulated reference eigenvalues for one of the canonical domains.
struct PaperTable
{
   std::vector<std::size_t>         n_dofs;      // per level
   std::vector<std::vector<double>> kappas;      // [level][eig]
   std::vector<double>              reference;   // [eig]
   std::vector<double>              rates;       // [eig]
};

const PaperTable& paper_table(Domain d);

struct StudySettings
{
   Domain             domain = Domain::square;
   int                degree = 1;
   std::vector<int>   levels;
   std::optional<int> reference_level;    // default: two uniform refinements of the finest level
   int                reference_degree = 1;
   double             lambda = 1.0;
   double             mu = 1.0;
   double             p = 1.0;
   int                n_eigs = 7;
   double             tol = 1e-10;
   std::uint64_t      seed = 0x5EED;
};

struct LevelResult
{
   int                 level = 0;
   int                 degree = 1;
   std::size_t         n_dofs = 0;
   double              h = 0.0;
   std::vector<double> kappas;
   int                 zero_mode_count = 0;

   bool operator==(const LevelResult&) const = default;
};

struct ConvergenceReport
{
   std::string                      domain;
   int                              degree = 1;
   std::vector<LevelResult>         levels;
   LevelResult                      reference;
   std::vector<std::vector<double>> errors;   // [level][eig]
   std::vector<double>              rates;    // [eig], NaN when undefined
   double                           theta = 0.0;
   double                           r1 = 1.0;
   double                           predicted_rate = 2.0;
   std::vector<double>              table_deltas;   // our reference minus the tabulated one
   bool                             nested = false;
   bool                             monotone = true;
   std::vector<std::string>         violations;

   bool operator==(const ConvergenceReport&) const;
};

/// Solves every study level and the reference, matches eigenvalues by
/// ascending index, and fits one rate per eigenvalue.
ConvergenceReport run_convergence(const StudySettings& settings);

enum class ReportFormat
{
   csv,
   json,
   svg
};

ReportFormat parse_report_format(const std::string& name);
std::string format_extension(ReportFormat f);

std::string emit_report(const ConvergenceReport& report, ReportFormat format);
ConvergenceReport read_report_json(const std::string& text);

/// `<domain>_k<k>_conv.<ext>`
std::string report_file_name(const ConvergenceReport& report, ReportFormat format);

/// Result document of a single solve (pretty-printed JSON).
std::string result_json(const std::string& domain, const SteklovProblem& problem, const SteklovResult& result);

} // namespace steklov
