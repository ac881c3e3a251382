#include "steklov/harness.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace steklov;

TEST(FitRate, ExactPowerLaws)
{
   const std::vector<double> hs{0.5, 0.25, 0.125, 0.0625};
   for (double rate : {2.0, 1.089}) {
      std::vector<double> e;
      for (double h : hs)
         e.push_back(3.7 * std::pow(h, rate));
      EXPECT_NEAR(fit_rate(hs, e), rate, 1e-12);
   }
}

TEST(FitRate, ZeroErrorsDropped)
{
   const std::vector<double> hs{0.5, 0.25, 0.125};
   EXPECT_NEAR(fit_rate(hs, std::vector<double>{0.25, 0.0625, 0.0}), 2.0, 1e-12);
   EXPECT_THROW(fit_rate(hs, std::vector<double>{0.25, 0.0, 0.0}), InsufficientData);
   EXPECT_THROW(fit_rate(std::vector<double>{0.5}, std::vector<double>{0.1}), InsufficientData);
}

TEST(FitRate, SquareTableFirstRow)
{
   // Tabulated square first row against its reference, with h = sqrt(2)/n and
   // n recovered from N = 2 (n+1)^2.
   const PaperTable&   t = paper_table(Domain::square);
   std::vector<double> hs, e;
   for (std::size_t i = 0; i < t.n_dofs.size(); ++i) {
      const double n = std::sqrt(t.n_dofs[i] / 2.0) - 1.0;
      hs.push_back(std::sqrt(2.0) / n);
      e.push_back(std::abs(t.kappas[i][0] - t.reference[0]));
   }
   // N = 242 is preasymptotic (pairwise rate 1.66 to the next level) and
   // drags the fit over all five levels down to 1.785.
   EXPECT_NEAR(fit_rate(hs, e), 1.785, 1e-3);
   const std::span<const double> hs4(hs.data() + 1, 4), e4(e.data() + 1, 4);
   EXPECT_NEAR(fit_rate(hs4, e4), t.rates[0], 0.15);
}

TEST(PaperTables, Shapes)
{
   for (Domain d : {Domain::square, Domain::lshape, Domain::disk, Domain::cube}) {
      const PaperTable& t = paper_table(d);
      EXPECT_EQ(t.n_dofs.size(), 5u);
      EXPECT_EQ(t.kappas.size(), 5u);
      for (const auto& row : t.kappas)
         EXPECT_EQ(row.size(), 7u);
      EXPECT_EQ(t.reference.size(), 7u);
      EXPECT_EQ(t.rates.size(), 7u);
   }
   // The square DOF counts are those of the structured mesh at n = 10, 30, ..., 90.
   const PaperTable& sq = paper_table(Domain::square);
   for (int i = 0; i < 5; ++i)
      EXPECT_EQ(sq.n_dofs[i], 2u * (20 * i + 11) * (20 * i + 11));
}

TEST(Domains, Names)
{
   for (Domain d : {Domain::square, Domain::lshape, Domain::disk, Domain::cube})
      EXPECT_EQ(parse_domain(domain_name(d)), d);
   EXPECT_THROW(parse_domain("torus"), std::invalid_argument);
   EXPECT_EQ(domain_dim(Domain::cube), 3);
}

namespace {

const ConvergenceReport& square_report()
{
   static const ConvergenceReport rep = [] {
      StudySettings s;
      s.domain = Domain::square;
      s.levels = {8, 4, 16};   // sorted internally
      return run_convergence(s);
   }();
   return rep;
}

} // namespace

TEST(Convergence, SquareStudy)
{
   const ConvergenceReport& r = square_report();
   ASSERT_EQ(r.levels.size(), 3u);
   EXPECT_EQ(r.levels[0].level, 4);
   EXPECT_EQ(r.reference.level, 64);
   EXPECT_EQ(r.reference.n_dofs, 2u * 65 * 65);
   EXPECT_TRUE(r.nested);
   EXPECT_TRUE(r.monotone);
   EXPECT_TRUE(r.violations.empty());
   EXPECT_EQ(r.rates.size(), 7u);
   EXPECT_EQ(r.table_deltas.size(), 7u);
   EXPECT_NEAR(r.theta, 0.5 * std::numbers::pi, 1e-12);
   EXPECT_EQ(r.predicted_rate, 2.0);
   for (std::size_t j = 0; j < 7; ++j)
      EXPECT_LE(r.errors[2][j], r.errors[0][j]);
   for (const auto& l : r.levels)
      EXPECT_EQ(l.zero_mode_count, 3);
}

TEST(Convergence, IdenticalMeshGivesZeroErrors)
{
   StudySettings s;
   s.domain = Domain::square;
   s.levels = {6, 6};
   s.reference_level = 6;
   const auto r = run_convergence(s);
   for (const auto& e : r.errors)
      for (double x : e)
         EXPECT_EQ(x, 0.0);
   for (double rate : r.rates)
      EXPECT_TRUE(std::isnan(rate));
}

TEST(Convergence, Errors)
{
   StudySettings s;
   s.domain = Domain::square;
   s.levels = {4};
   EXPECT_THROW(run_convergence(s), InsufficientData);
   s.levels = {4, 8};
   s.reference_level = 6;
   EXPECT_THROW(run_convergence(s), std::invalid_argument);
}

TEST(Convergence, DiskIsNotNested)
{
   StudySettings s;
   s.domain = Domain::disk;
   s.levels = {8, 16};
   s.n_eigs = 4;
   const auto r = run_convergence(s);
   EXPECT_FALSE(r.nested);
   EXPECT_EQ(r.reference.level, 64);
   EXPECT_EQ(r.table_deltas.size(), 4u);
}

TEST(Report, CsvRows)
{
   const std::string csv = emit_report(square_report(), ReportFormat::csv);
   std::istringstream in(csv);
   std::string        line;
   std::getline(in, line);
   EXPECT_EQ(line, "level,N,h,eig_index,kappa,error,rate");
   int rows = 0;
   while (std::getline(in, line)) {
      ++rows;
      EXPECT_EQ(std::count(line.begin(), line.end(), ','), 6);
   }
   EXPECT_EQ(rows, 21);
}

TEST(Report, SvgIsWellFormed)
{
   const std::string           svg = emit_report(square_report(), ReportFormat::svg);
   std::istringstream          in(svg);
   boost::property_tree::ptree tree;
   EXPECT_NO_THROW(boost::property_tree::read_xml(in, tree));
   EXPECT_EQ(tree.count("svg"), 1u);
   EXPECT_NE(svg.find("rate 1.089"), std::string::npos);
   EXPECT_NE(svg.find("rate 2"), std::string::npos);
}

TEST(Report, JsonRoundTrip)
{
   const ConvergenceReport& r = square_report();
   const ConvergenceReport  back = read_report_json(emit_report(r, ReportFormat::json));
   EXPECT_TRUE(back == r);

   ConvergenceReport with_nan = r;
   with_nan.rates[0] = std::numeric_limits<double>::quiet_NaN();
   EXPECT_TRUE(read_report_json(emit_report(with_nan, ReportFormat::json)) == with_nan);
}

TEST(Report, FormatsAndNames)
{
   EXPECT_EQ(report_file_name(square_report(), ReportFormat::svg), "square_k1_conv.svg");
   EXPECT_EQ(parse_report_format("csv"), ReportFormat::csv);
   EXPECT_THROW(parse_report_format("pdf"), std::invalid_argument);
}

TEST(Report, ResultJsonSchema)
{
   SteklovProblem pb;
   pb.mesh = std::make_shared<const Mesh>(generate_unit_square(4));
   pb.n_eigs = 3;
   const auto        res = solve_steklov(pb);
   const std::string doc = result_json("square", pb, res);
   for (const char* key : {"\"domain\"", "\"n_dofs\"", "\"h\"", "\"lambda\"", "\"mu\"", "\"weight\"", "\"kappas\"",
                           "\"omegas\"", "\"residuals\"", "\"groups\"", "\"zero_mode_count\"", "\"zero_mode_angle\""})
      EXPECT_NE(doc.find(key), std::string::npos) << key;
}
