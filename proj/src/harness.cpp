#include "steklov/harness.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

namespace steklov {

using nlohmann::json;

std::string domain_name(Domain d)
{
   switch (d) {
   case Domain::square: return "square";
   case Domain::lshape: return "lshape";
   case Domain::disk: return "disk";
   case Domain::cube: return "cube";
   }
   return "unknown";
}

Domain parse_domain(const std::string& name)
{
   if (name == "square")
      return Domain::square;
   if (name == "lshape")
      return Domain::lshape;
   if (name == "disk")
      return Domain::disk;
   if (name == "cube")
      return Domain::cube;
   throw std::invalid_argument("unknown domain '" + name + "'");
}

int domain_dim(Domain d) { return d == Domain::cube ? 3 : 2; }

Mesh make_domain_mesh(Domain d, int level)
{
   switch (d) {
   case Domain::square: return generate_unit_square(level);
   case Domain::lshape: return generate_lshape(level);
   case Domain::disk: return generate_disk(level);
   case Domain::cube: return generate_unit_cube(level);
   }
   throw std::invalid_argument("make_domain_mesh: bad domain");
}

double fit_rate(std::span<const double> hs, std::span<const double> errors)
{
   if (hs.size() != errors.size())
      throw std::invalid_argument("fit_rate: hs and errors differ in length");
   std::vector<double> x, y;
   for (std::size_t i = 0; i < hs.size(); ++i)
      if (errors[i] > 0.0 && hs[i] > 0.0) {
         x.push_back(std::log(hs[i]));
         y.push_back(std::log(errors[i]));
      }
   if (x.size() < 2)
      throw InsufficientData("fit_rate: fewer than two usable (h, error) pairs");
   const double n = static_cast<double>(x.size());
   double       mx = 0.0, my = 0.0;
   for (std::size_t i = 0; i < x.size(); ++i) {
      mx += x[i];
      my += y[i];
   }
   mx /= n;
   my /= n;
   double sxy = 0.0, sxx = 0.0;
   for (std::size_t i = 0; i < x.size(); ++i) {
      sxy += (x[i] - mx) * (y[i] - my);
      sxx += (x[i] - mx) * (x[i] - mx);
   }
   if (sxx == 0.0)
      throw InsufficientData("fit_rate: all h values coincide");
   return sxy / sxx;
}

const PaperTable& paper_table(Domain d)
{
   static const PaperTable square{
     {242, 1922, 5202, 10082, 16562},
     {{2.800192, 2.872823, 2.966591, 3.734775, 5.480897, 5.860259, 6.84993},
      {2.57581, 2.710273, 2.722965, 3.714195, 5.103026, 5.288715, 5.806006},
      {2.549729, 2.689398, 2.69431, 3.712252, 4.906772, 5.266997, 5.801406},
      {2.541415, 2.682579, 2.685177, 3.711705, 4.842315, 5.260878, 5.800129},
      {2.537678, 2.679477, 2.681081, 3.711479, 4.81281, 5.258216, 5.799602}},
     {2.532570, 2.675175, 2.675513, 3.711202, 4.771482, 5.254700, 5.79879},
     {2.0419, 2.0136, 2.0499, 2.2488, 1.9973, 2.1177, 2.2558}};
   static const PaperTable disk{
     {190, 1520, 4046, 7794, 12956},
     {{3.003639, 3.003639, 3.059373, 3.063728, 4.324313, 4.39301, 5.007277},
      {3.000406, 3.000406, 3.006645, 3.00676, 4.036279, 4.03863, 5.000812},
      {3.000146, 3.000146, 3.002431, 3.00252, 4.013165, 4.014033, 5.000292},
      {3.000075, 3.000075, 3.001284, 3.001312, 4.006795, 4.007199, 5.000149},
      {3.000045, 3.000045, 3.000756, 3.00077, 4.004003, 4.004586, 5.00009}},
     {3.000009, 3.000009, 3.000009, 3.000009, 4.000014, 4.000014, 5.000018},
     {2.1645, 2.0699, 2.1528, 2.0730, 2.1638, 2.1349, 2.1995}};
   static const PaperTable lshape{
     {616, 5114, 14244, 27164, 45620},
     {{1.168833, 1.750674, 2.061, 2.177396, 2.724265, 2.94148, 3.513536},
      {1.158064, 1.719661, 2.021514, 2.135806, 2.635748, 2.770783, 3.404443},
      {1.156757, 1.716536, 2.016901, 2.130581, 2.623772, 2.751355, 3.385},
      {1.156416, 1.715522, 2.015461, 2.128869, 2.620085, 2.744538, 3.378496},
      {1.156000, 1.715113, 2.014828, 2.127828, 2.618166, 2.741737, 3.375532}},
     {1.155308, 1.714410, 2.01371, 2.125962, 2.614815, 2.736563, 3.370429},
     {1.5808, 1.6349, 1.6895, 1.4848, 1.7108, 1.5737, 1.8972}};
   static const PaperTable cube{
     {1029, 3000, 6591, 12288, 20577},
     {{2.082904, 2.082904, 2.084313, 2.099347, 2.106801, 2.106801, 2.119688},
      {2.072949, 2.072949, 2.073188, 2.094227, 2.098076, 2.098076, 2.110279},
      {2.068958, 2.068958, 2.068959, 2.092327, 2.094638, 2.094638, 2.106316},
      {2.066928, 2.066979, 2.066979, 2.091424, 2.092955, 2.092955, 2.104312},
      {2.065802, 2.065861, 2.065861, 2.090926, 2.092011, 2.092011, 2.103168}},
     {2.06318, 2.063182, 2.063182, 2.089772, 2.089774, 2.089774, 2.100399},
     {2.0820, 2.0238, 2.0242, 2.0952, 2.0469, 2.0469, 2.0007}};
   switch (d) {
   case Domain::square: return square;
   case Domain::lshape: return lshape;
   case Domain::disk: return disk;
   case Domain::cube: return cube;
   }
   throw std::invalid_argument("paper_table: bad domain");
}

namespace {

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

bool same_double(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

bool same_doubles(const std::vector<double>& a, const std::vector<double>& b)
{
   return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), same_double);
}

LevelResult solve_level(const Mesh& mesh, int level, int degree, const StudySettings& s)
{
   SteklovProblem pb;
   pb.mesh = std::make_shared<const Mesh>(mesh);
   pb.degree = degree;
   pb.material = ElasticMaterial(s.lambda, s.mu, mesh.dim());
   pb.weight = BoundaryWeight::scalar(s.p);
   pb.n_eigs = s.n_eigs;
   pb.tol = s.tol;
   pb.seed = s.seed;
   const SteklovResult r = solve_steklov(pb);
   LevelResult out;
   out.level = level;
   out.degree = degree;
   out.n_dofs = r.n_dofs;
   out.h = r.h;
   out.kappas = r.modes.kappas;
   out.zero_mode_count = r.zero_mode_count;
   return out;
}

bool levels_nested(Domain d, const std::vector<int>& levels)
{
   if (d == Domain::disk)
      return false;
   for (std::size_t i = 1; i < levels.size(); ++i)
      if (levels[i] == levels[i - 1] || levels[i] % levels[i - 1] != 0)
         return false;
   return true;
}

} // namespace

bool ConvergenceReport::operator==(const ConvergenceReport& o) const
{
   auto same_level = [](const LevelResult& a, const LevelResult& b) {
      return a.level == b.level && a.degree == b.degree && a.n_dofs == b.n_dofs && same_double(a.h, b.h) &&
             same_doubles(a.kappas, b.kappas) && a.zero_mode_count == b.zero_mode_count;
   };
   if (domain != o.domain || degree != o.degree || levels.size() != o.levels.size() ||
       errors.size() != o.errors.size())
      return false;
   for (std::size_t i = 0; i < levels.size(); ++i)
      if (!same_level(levels[i], o.levels[i]) || !same_doubles(errors[i], o.errors[i]))
         return false;
   return same_level(reference, o.reference) && same_doubles(rates, o.rates) && same_double(theta, o.theta) &&
          same_double(r1, o.r1) && same_double(predicted_rate, o.predicted_rate) &&
          same_doubles(table_deltas, o.table_deltas) && nested == o.nested && monotone == o.monotone &&
          violations == o.violations;
}

ConvergenceReport run_convergence(const StudySettings& s)
{
   if (s.levels.size() < 2)
      throw InsufficientData("run_convergence: at least two study levels are required");
   if (s.n_eigs < 1)
      throw std::invalid_argument("run_convergence: n_eigs must be >= 1");
   std::vector<int> levels = s.levels;
   std::sort(levels.begin(), levels.end());

   std::vector<Mesh> meshes;
   for (int l : levels)
      meshes.push_back(make_domain_mesh(s.domain, l));

   int  ref_level = 0;
   Mesh ref_mesh = [&] {
      if (s.reference_level) {
         ref_level = *s.reference_level;
         return make_domain_mesh(s.domain, ref_level);
      }
      ref_level = 4 * levels.back();
      // The disk polygon changes with m, so its reference is regenerated.
      if (s.domain == Domain::disk)
         return make_domain_mesh(s.domain, ref_level);
      return uniform_refine(uniform_refine(meshes.back()));
   }();

   // Independent levels are solved concurrently; results are collected in
   // level order so the report does not depend on scheduling.
   std::vector<std::future<LevelResult>> jobs;
   for (std::size_t i = 0; i < levels.size(); ++i)
      jobs.push_back(std::async(std::launch::async, [&, i] { return solve_level(meshes[i], levels[i], s.degree, s); }));
   LevelResult ref = solve_level(ref_mesh, ref_level, s.reference_degree, s);

   ConvergenceReport rep;
   rep.domain = domain_name(s.domain);
   rep.degree = s.degree;
   for (auto& j : jobs)
      rep.levels.push_back(j.get());
   rep.reference = std::move(ref);

   for (const auto& lv : rep.levels)
      if (lv.n_dofs > rep.reference.n_dofs)
         throw std::invalid_argument("run_convergence: reference level is coarser than a study level");

   const std::size_t ne = static_cast<std::size_t>(s.n_eigs);
   for (const auto& lv : rep.levels)
      if (lv.kappas.size() < ne)
         throw std::runtime_error("run_convergence: level " + std::to_string(lv.level) + " returned too few modes");
   if (rep.reference.kappas.size() < ne)
      throw std::runtime_error("run_convergence: reference returned too few modes");

   for (const auto& lv : rep.levels) {
      std::vector<double> e(ne);
      for (std::size_t j = 0; j < ne; ++j)
         e[j] = std::abs(lv.kappas[j] - rep.reference.kappas[j]);
      rep.errors.push_back(std::move(e));
   }
   std::vector<double> hs;
   for (const auto& lv : rep.levels)
      hs.push_back(lv.h);
   for (std::size_t j = 0; j < ne; ++j) {
      std::vector<double> ej;
      for (const auto& e : rep.errors)
         ej.push_back(e[j]);
      try {
         rep.rates.push_back(fit_rate(hs, ej));
      }
      catch (const InsufficientData&) {
         rep.rates.push_back(nan_value);
      }
   }

   rep.theta = meshes.back().largest_boundary_angle();
   const RegularityInfo reg = regularity_root(rep.theta);
   rep.r1 = reg.r1;
   rep.predicted_rate = reg.predicted_rate(s.degree);

   const PaperTable& table = paper_table(s.domain);
   for (std::size_t j = 0; j < std::min(ne, table.reference.size()); ++j)
      rep.table_deltas.push_back(rep.reference.kappas[j] - table.reference[j]);

   rep.nested = levels_nested(s.domain, levels);
   if (rep.nested) {
      for (std::size_t i = 1; i < rep.levels.size(); ++i)
         for (std::size_t j = 0; j < ne; ++j) {
            const double coarse = rep.levels[i - 1].kappas[j];
            const double fine = rep.levels[i].kappas[j];
            if (fine > coarse + 1e-9 * std::max(1.0, std::abs(coarse))) {
               rep.monotone = false;
               std::ostringstream msg;
               msg << std::setprecision(17) << "kappa_" << j + 1 << " increases from level " << rep.levels[i - 1].level
                   << " (" << coarse << ") to level " << rep.levels[i].level << " (" << fine << ")";
               rep.violations.push_back(msg.str());
            }
         }
   }
   return rep;
}

ReportFormat parse_report_format(const std::string& name)
{
   if (name == "csv")
      return ReportFormat::csv;
   if (name == "json")
      return ReportFormat::json;
   if (name == "svg")
      return ReportFormat::svg;
   throw std::invalid_argument("unsupported report format '" + name + "'");
}

std::string format_extension(ReportFormat f)
{
   switch (f) {
   case ReportFormat::csv: return "csv";
   case ReportFormat::json: return "json";
   case ReportFormat::svg: return "svg";
   }
   return "";
}

std::string report_file_name(const ConvergenceReport& report, ReportFormat format)
{
   return report.domain + "_k" + std::to_string(report.degree) + "_conv." + format_extension(format);
}

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j) { return j.is_null() ? nan_value : j.get<double>(); }

json numbers(const std::vector<double>& v)
{
   json a = json::array();
   for (double x : v)
      a.push_back(number_or_null(x));
   return a;
}

std::vector<double> numbers_from(const json& a)
{
   std::vector<double> v;
   for (const auto& x : a)
      v.push_back(number_from(x));
   return v;
}

json level_json(const LevelResult& l)
{
   return {{"level", l.level},   {"degree", l.degree},          {"N", l.n_dofs},
           {"h", l.h},           {"kappas", numbers(l.kappas)}, {"zero_mode_count", l.zero_mode_count}};
}

LevelResult level_from(const json& j)
{
   LevelResult l;
   l.level = j.at("level").get<int>();
   l.degree = j.at("degree").get<int>();
   l.n_dofs = j.at("N").get<std::size_t>();
   l.h = number_from(j.at("h"));
   l.kappas = numbers_from(j.at("kappas"));
   l.zero_mode_count = j.at("zero_mode_count").get<int>();
   return l;
}

std::string emit_csv(const ConvergenceReport& r)
{
   std::ostringstream out;
   out << std::setprecision(17);
   out << "level,N,h,eig_index,kappa,error,rate\n";
   for (std::size_t i = 0; i < r.levels.size(); ++i) {
      const auto& lv = r.levels[i];
      for (std::size_t j = 0; j < r.errors[i].size(); ++j) {
         out << lv.level << ',' << lv.n_dofs << ',' << lv.h << ',' << j + 1 << ',' << lv.kappas[j] << ','
             << r.errors[i][j] << ',';
         if (std::isfinite(r.rates[j]))
            out << r.rates[j];
         else
            out << "nan";
         out << '\n';
      }
   }
   return out.str();
}

std::string emit_json(const ConvergenceReport& r)
{
   json j;
   j["domain"] = r.domain;
   j["degree"] = r.degree;
   j["levels"] = json::array();
   for (const auto& l : r.levels)
      j["levels"].push_back(level_json(l));
   j["reference"] = level_json(r.reference);
   j["errors"] = json::array();
   for (const auto& e : r.errors)
      j["errors"].push_back(numbers(e));
   j["rates"] = numbers(r.rates);
   j["theta"] = r.theta;
   j["r1"] = r.r1;
   j["predicted_rate"] = r.predicted_rate;
   j["table_deltas"] = numbers(r.table_deltas);
   j["nested"] = r.nested;
   j["monotone"] = r.monotone;
   j["violations"] = r.violations;
   return j.dump(2) + "\n";
}

std::string emit_svg(const ConvergenceReport& r)
{
   constexpr double width = 640, height = 480, left = 70, right = 20, top = 20, bottom = 50;
   const int        dim = r.domain == "cube" ? 3 : 2;

   double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
   double ymin = xmin, ymax = -xmin;
   for (std::size_t i = 0; i < r.levels.size(); ++i) {
      const double x = std::log10(static_cast<double>(r.levels[i].n_dofs));
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      for (double e : r.errors[i])
         if (e > 0.0) {
            ymin = std::min(ymin, std::log10(e));
            ymax = std::max(ymax, std::log10(e));
         }
   }
   if (!std::isfinite(xmin)) {
      xmin = 0.0;
      xmax = 1.0;
   }
   if (!std::isfinite(ymin)) {
      ymin = -1.0;
      ymax = 0.0;
   }
   if (xmax - xmin < 1e-12)
      xmax = xmin + 1.0;
   if (ymax - ymin < 1e-12)
      ymax = ymin + 1.0;
   const double pad_y = 0.05 * (ymax - ymin);
   ymin -= pad_y;
   ymax += pad_y;

   auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * (width - left - right); };
   auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * (height - top - bottom); };

   static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

   std::ostringstream out;
   out << std::fixed << std::setprecision(2);
   out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
   out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
   out << "<title>" << r.domain << " k=" << r.degree << ": error vs N (log-log)</title>\n";
   out << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
   out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << width - left - right << "\" height=\""
       << height - top - bottom << "\" fill=\"none\" stroke=\"black\"/>\n";
   out << "<text x=\"" << 0.5 * (left + width - right) << "\" y=\"" << height - 12
       << "\" text-anchor=\"middle\" font-size=\"13\">log10 N</text>\n";
   out << "<text x=\"16\" y=\"" << 0.5 * (top + height - bottom) << "\" text-anchor=\"middle\" font-size=\"13\""
       << " transform=\"rotate(-90 16 " << 0.5 * (top + height - bottom) << ")\">log10 |kappa_h - kappa_ref|</text>\n";
   out << "<text x=\"" << left << "\" y=\"" << height - bottom + 16 << "\" font-size=\"11\">" << xmin << "</text>\n";
   out << "<text x=\"" << width - right << "\" y=\"" << height - bottom + 16 << "\" text-anchor=\"end\" font-size=\"11\">"
       << xmax << "</text>\n";
   out << "<text x=\"" << left - 4 << "\" y=\"" << top + 10 << "\" text-anchor=\"end\" font-size=\"11\">" << ymax
       << "</text>\n";
   out << "<text x=\"" << left - 4 << "\" y=\"" << height - bottom << "\" text-anchor=\"end\" font-size=\"11\">"
       << ymin << "</text>\n";

   // Guides: error ~ h^rate ~ N^(-rate/d), anchored at the first level's largest error.
   const double anchor_y = ymax - pad_y;
   for (double rate : {1.089, 2.0}) {
      const double slope = -rate / dim;
      const double y1 = anchor_y + slope * (xmax - xmin);
      out << "<polyline fill=\"none\" stroke=\"gray\" stroke-dasharray=\"6,4\" points=\"" << px(xmin) << ','
          << py(anchor_y) << ' ' << px(xmax) << ',' << py(y1) << "\"/>\n";
      out << "<text x=\"" << px(xmax) - 4 << "\" y=\"" << std::clamp(py(y1) - 4, top + 10, height - bottom - 4)
          << "\" text-anchor=\"end\" font-size=\"11\" fill=\"gray\">rate " << std::setprecision(3) << rate
          << std::setprecision(2) << "</text>\n";
   }

   const std::size_t ne = r.rates.size();
   for (std::size_t j = 0; j < ne; ++j) {
      const char* color = colors[j % 10];
      std::ostringstream pts;
      pts << std::fixed << std::setprecision(2);
      int count = 0;
      for (std::size_t i = 0; i < r.levels.size(); ++i) {
         const double e = r.errors[i][j];
         if (!(e > 0.0))
            continue;
         pts << (count++ ? " " : "") << px(std::log10(static_cast<double>(r.levels[i].n_dofs))) << ','
             << py(std::log10(e));
      }
      if (count > 0)
         out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts.str()
             << "\"/>\n";
      out << "<text x=\"" << width - right - 8 << "\" y=\"" << top + 14 * (j + 1) << "\" text-anchor=\"end\""
          << " font-size=\"11\" fill=\"" << color << "\">kappa_" << j + 1 << "</text>\n";
   }
   out << "</svg>\n";
   return out.str();
}

} // namespace

std::string emit_report(const ConvergenceReport& report, ReportFormat format)
{
   switch (format) {
   case ReportFormat::csv: return emit_csv(report);
   case ReportFormat::json: return emit_json(report);
   case ReportFormat::svg: return emit_svg(report);
   }
   throw std::invalid_argument("emit_report: unsupported format");
}

ConvergenceReport read_report_json(const std::string& text)
{
   const json        j = json::parse(text);
   ConvergenceReport r;
   r.domain = j.at("domain").get<std::string>();
   r.degree = j.at("degree").get<int>();
   for (const auto& l : j.at("levels"))
      r.levels.push_back(level_from(l));
   r.reference = level_from(j.at("reference"));
   for (const auto& e : j.at("errors"))
      r.errors.push_back(numbers_from(e));
   r.rates = numbers_from(j.at("rates"));
   r.theta = number_from(j.at("theta"));
   r.r1 = number_from(j.at("r1"));
   r.predicted_rate = number_from(j.at("predicted_rate"));
   r.table_deltas = numbers_from(j.at("table_deltas"));
   r.nested = j.at("nested").get<bool>();
   r.monotone = j.at("monotone").get<bool>();
   r.violations = j.at("violations").get<std::vector<std::string>>();
   return r;
}

std::string result_json(const std::string& domain, const SteklovProblem& problem, const SteklovResult& result)
{
   json weight;
   const int dim = problem.mesh->dim();
   if (problem.weight.kind() == BoundaryWeight::Kind::scalar) {
      weight["kind"] = "scalar";
      if (problem.weight.per_facet())
         weight["per_facet"] = true;
      else
         weight["p"] = problem.weight.scalar_at(0);
   }
   else {
      weight["kind"] = "matrix";
      if (problem.weight.per_facet())
         weight["per_facet"] = true;
      else {
         const auto& m = problem.weight.matrix_at(0);
         json        rows = json::array();
         for (int i = 0; i < dim; ++i) {
            json row = json::array();
            for (int k = 0; k < dim; ++k)
               row.push_back(m[i][k]);
            rows.push_back(row);
         }
         weight["M"] = rows;
      }
   }
   json j;
   j["domain"] = domain;
   j["degree"] = problem.degree;
   j["n_dofs"] = result.n_dofs;
   j["h"] = result.h;
   j["lambda"] = problem.material.lambda;
   j["mu"] = problem.material.mu;
   j["weight"] = weight;
   j["kappas"] = numbers(result.modes.kappas);
   j["omegas"] = numbers(result.modes.omegas);
   j["residuals"] = numbers(result.modes.residuals);
   j["groups"] = result.modes.multiplicity_groups;
   j["zero_mode_count"] = result.zero_mode_count;
   j["zero_mode_angle"] = result.zero_mode_angle;
   j["converged"] = result.modes.converged;
   j["warnings"] = result.warnings;
   return j.dump(2) + "\n";
}

} // namespace steklov
