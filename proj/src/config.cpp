#include "steklov/config.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

namespace steklov {

namespace {

std::string trim(const std::string& s)
{
   const auto b = s.find_first_not_of(" \t\r");
   if (b == std::string::npos)
      return "";
   const auto e = s.find_last_not_of(" \t\r");
   return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text)
{
   const std::string t = trim(text);
   T                 v{};
   const char*       first = t.data();
   const char*       last = t.data() + t.size();
   // Accept a 0x prefix for integers (the default seed is written that way).
   int base = 10;
   if constexpr (std::is_integral_v<T>) {
      if (t.size() > 2 && t[0] == '0' && (t[1] == 'x' || t[1] == 'X')) {
         first += 2;
         base = 16;
      }
   }
   std::from_chars_result r;
   if constexpr (std::is_integral_v<T>)
      r = std::from_chars(first, last, v, base);
   else
      r = std::from_chars(first, last, v);
   if (t.empty() || r.ec != std::errc() || r.ptr != last)
      throw ConfigError("invalid value '" + text + "' for " + key);
   return v;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text)
{
   std::vector<T> out;
   std::string    item;
   std::string    s = text;
   for (char& c : s)
      if (c == ' ' || c == ';')
         c = ',';
   std::istringstream in(s);
   while (std::getline(in, item, ','))
      if (!trim(item).empty())
         out.push_back(parse_number<T>(key, item));
   if (out.empty())
      throw ConfigError("empty list for " + key);
   return out;
}

std::string format_double(double v)
{
   char buf[32];
   std::snprintf(buf, sizeof buf, "%.17g", v);
   return buf;
}

template <class T>
std::string join(const std::vector<T>& v)
{
   std::string out;
   for (std::size_t i = 0; i < v.size(); ++i) {
      if (i)
         out += ',';
      if constexpr (std::is_floating_point_v<T>)
         out += format_double(v[i]);
      else
         out += std::to_string(v[i]);
   }
   return out;
}

} // namespace

const std::vector<std::string>& config_keys()
{
   static const std::vector<std::string> keys{
     "command", "domain", "mesh", "n", "k", "lambda", "mu", "p", "M", "n-eigs", "tol", "seed",
     "reference-level", "reference-k", "theta-deg", "format", "output"};
   return keys;
}

void apply_setting(RunConfig& cfg, const std::string& key_in, const std::string& value_in)
{
   std::string key = trim(key_in);
   for (char& c : key)
      if (c == '_')
         c = '-';
   const std::string value = trim(value_in);

   if (key == "command")
      cfg.command = value;
   else if (key == "domain") {
      if (!value.empty() && value != "square" && value != "lshape" && value != "disk" && value != "cube" && value != "meshfile")
         throw ConfigError("unknown domain '" + value + "'");
      cfg.domain = value;
   }
   else if (key == "mesh")
      cfg.mesh = value;
   else if (key == "n") {
      cfg.levels = value.empty() ? std::vector<int>{} : parse_list<int>(key, value);
      for (int l : cfg.levels)
         if (l < 1)
            throw ConfigError("mesh level must be positive");
   }
   else if (key == "k") {
      cfg.degree = parse_number<int>(key, value);
      if (cfg.degree != 1 && cfg.degree != 2)
         throw ConfigError("k must be 1 or 2");
   }
   else if (key == "lambda")
      cfg.lambda = parse_number<double>(key, value);
   else if (key == "mu")
      cfg.mu = parse_number<double>(key, value);
   else if (key == "p")
      cfg.p = parse_number<double>(key, value);
   else if (key == "M") {
      if (value.empty() || value == "none")
         cfg.matrix.clear();
      else {
         cfg.matrix = parse_list<double>(key, value);
         if (cfg.matrix.size() != 4 && cfg.matrix.size() != 9)
            throw ConfigError("M needs 4 (2D) or 9 (3D) entries");
      }
   }
   else if (key == "n-eigs") {
      cfg.n_eigs = parse_number<int>(key, value);
      if (cfg.n_eigs < 1)
         throw ConfigError("n-eigs must be positive");
   }
   else if (key == "tol") {
      cfg.tol = parse_number<double>(key, value);
      if (!(cfg.tol > 0.0))
         throw ConfigError("tol must be positive");
   }
   else if (key == "seed")
      cfg.seed = parse_number<std::uint64_t>(key, value);
   else if (key == "reference-level") {
      if (value.empty() || value == "auto")
         cfg.reference_level.reset();
      else
         cfg.reference_level = parse_number<int>(key, value);
   }
   else if (key == "reference-k") {
      cfg.reference_degree = parse_number<int>(key, value);
      if (cfg.reference_degree != 1 && cfg.reference_degree != 2)
         throw ConfigError("reference-k must be 1 or 2");
   }
   else if (key == "theta-deg") {
      if (value.empty() || value == "none")
         cfg.theta_deg.reset();
      else
         cfg.theta_deg = parse_number<double>(key, value);
   }
   else if (key == "format") {
      if (value != "text" && value != "json")
         throw ConfigError("format must be text or json");
      cfg.format = value;
   }
   else if (key == "output")
      cfg.output = value;
   else
      throw ConfigError("unknown key '" + key_in + "'");
}

RunConfig parse_config(const std::string& text, RunConfig base)
{
   std::istringstream in(text);
   std::string        line;
   int                lineno = 0;
   while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos)
         line.erase(hash);
      if (trim(line).empty())
         continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
         throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
      try {
         apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
      }
      catch (const ConfigError& e) {
         throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
      }
   }
   return base;
}

std::string canonical_config(const RunConfig& c)
{
   std::ostringstream out;
   out << "command = " << c.command << '\n';
   out << "domain = " << c.domain << '\n';
   out << "mesh = " << c.mesh << '\n';
   out << "n = " << (c.levels.empty() ? std::string() : join(c.levels)) << '\n';
   out << "k = " << c.degree << '\n';
   out << "lambda = " << format_double(c.lambda) << '\n';
   out << "mu = " << format_double(c.mu) << '\n';
   out << "p = " << format_double(c.p) << '\n';
   out << "M = " << (c.matrix.empty() ? std::string("none") : join(c.matrix)) << '\n';
   out << "n-eigs = " << c.n_eigs << '\n';
   out << "tol = " << format_double(c.tol) << '\n';
   out << "seed = " << c.seed << '\n';
   out << "reference-level = " << (c.reference_level ? std::to_string(*c.reference_level) : "auto") << '\n';
   out << "reference-k = " << c.reference_degree << '\n';
   out << "theta-deg = " << (c.theta_deg ? format_double(*c.theta_deg) : "none") << '\n';
   out << "format = " << c.format << '\n';
   out << "output = " << c.output << '\n';
   return out.str();
}

} // namespace steklov
