#include "json.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct CliRun
{
   int         code = -1;
   std::string out;
};

// Runs the CLI in `dir`, capturing stdout and stderr together.
CliRun run(const std::string& args, const fs::path& dir = fs::temp_directory_path())
{
   const std::string cmd = "cd '" + dir.string() + "' && '" STEKLAME_PATH "' " + args + " 2>&1";
   CliRun               r;
   FILE*             pipe = popen(cmd.c_str(), "r");
   if (!pipe)
      return r;
   std::array<char, 4096> buf;
   while (fgets(buf.data(), buf.size(), pipe))
      r.out += buf.data();
   const int status = pclose(pipe);
   r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
   return r;
}

fs::path scratch_dir(const std::string& name)
{
   const fs::path d = fs::temp_directory_path() / ("steklame_test_" + name);
   fs::remove_all(d);
   fs::create_directories(d);
   return d;
}

std::string slurp(const fs::path& p)
{
   std::ifstream      in(p);
   std::ostringstream s;
   s << in.rdbuf();
   return s.str();
}

} // namespace

TEST(Cli, SolveSquare)
{
   const fs::path dir = scratch_dir("solve");
   const CliRun      r = run("solve --domain square --n 10 --k 1 --lambda 1 --mu 1 --p 1 --n-eigs 7", dir);
   EXPECT_EQ(r.code, 0) << r.out;
   EXPECT_NE(r.out.find("    1      2.800192"), std::string::npos) << r.out;
   EXPECT_NE(r.out.find("zero modes: 3"), std::string::npos);
   const auto doc = nlohmann::json::parse(slurp(dir / "square_n10_k1.json"));
   EXPECT_EQ(doc.at("n_dofs").get<int>(), 242);
   EXPECT_NEAR(doc.at("kappas")[0].get<double>(), 2.800192, 1e-5);
}

TEST(Cli, SolveCubeZeroModes)
{
   const CliRun r = run("solve --domain cube --n 6 --n-eigs 3 --output cube.json", scratch_dir("cube"));
   EXPECT_EQ(r.code, 0) << r.out;
   EXPECT_NE(r.out.find("zero modes: 6"), std::string::npos) << r.out;
}

TEST(Cli, SolveJsonAndMatrixWeight)
{
   const CliRun r = run("solve --domain square --n 6 --M 1 0 0 2 --format json --output m.json", scratch_dir("m"));
   EXPECT_EQ(r.code, 0) << r.out;
   const auto doc = nlohmann::json::parse(r.out);
   EXPECT_EQ(doc.at("weight").at("kind"), "matrix");
   for (const auto& w : doc.at("omegas"))
      EXPECT_GT(w.get<double>(), 0.0);
}

TEST(Cli, UsageErrors)
{
   CliRun r = run("solve --n 10");
   EXPECT_EQ(r.code, 1);
   EXPECT_NE(r.out.find("Usage"), std::string::npos);
   EXPECT_EQ(run("solve --domain square --n 10 --bogus 3").code, 1);
   EXPECT_EQ(run("").code, 1);
   EXPECT_EQ(run("solve --domain square --n 10 --k 5").code, 1);
   EXPECT_EQ(run("solve --domain square --n 4 --lambda -3").code, 1);
}

TEST(Cli, IoErrors)
{
   EXPECT_EQ(run("solve --domain meshfile --mesh /nonexistent/mesh.txt").code, 3);
   EXPECT_EQ(run("solve --domain square --n 4 --output /nonexistent/dir/r.json").code, 3);
   EXPECT_EQ(run("solve --config /nonexistent/run.cfg").code, 3);
}

TEST(Cli, MeshFile)
{
   const fs::path dir = scratch_dir("meshfile");
   std::ofstream(dir / "tri.mesh") << "smesh 2 4 2\n0 0\n1 0\n1 1\n0 1\n1 2 3\n1 3 4\n";
   const CliRun r = run("solve --domain meshfile --mesh tri.mesh --n-eigs 2", dir);
   EXPECT_EQ(r.code, 0) << r.out;
   std::ofstream(dir / "bad.mesh") << "smesh 2 4 2\n0 0\n1 0\n1 1\n0 1\n1 2 3\n1 3 9\n";
   EXPECT_EQ(run("solve --domain meshfile --mesh bad.mesh", dir).code, 1);
}

TEST(Cli, NonConvergence)
{
   const CliRun r = run("solve --domain square --n 12 --tol 1e-300", scratch_dir("nc"));
   EXPECT_EQ(r.code, 2) << r.out;
}

TEST(Cli, Converge)
{
   const fs::path dir = scratch_dir("converge");
   const CliRun      r = run("converge --domain square --n 4 8 --output reports", dir);
   EXPECT_EQ(r.code, 0) << r.out;
   for (const char* f : {"square_k1_conv.csv", "square_k1_conv.json", "square_k1_conv.svg"})
      EXPECT_TRUE(fs::exists(dir / "reports" / f)) << f;
   EXPECT_NE(r.out.find("monotonicity: ok"), std::string::npos);

   const CliRun single = run("converge --domain square --n 4", dir);
   EXPECT_EQ(single.code, 1);
   EXPECT_NE(single.out.find("at least two"), std::string::npos);
}

TEST(Cli, ConvergeIsReproducible)
{
   const fs::path a = scratch_dir("rep_a"), b = scratch_dir("rep_b");
   ASSERT_EQ(run("converge --domain disk --n 8 16 --n-eigs 4", a).code, 0);
   ASSERT_EQ(run("converge --domain disk --n 8 16 --n-eigs 4", b).code, 0);
   for (const char* f : {"disk_k1_conv.csv", "disk_k1_conv.json", "disk_k1_conv.svg"})
      EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(Cli, Regularity)
{
   CliRun r = run("regularity --theta-deg 270");
   EXPECT_EQ(r.code, 0);
   EXPECT_NE(r.out.find("r1 = 0.5445"), std::string::npos) << r.out;
   r = run("regularity --theta-deg 90");
   EXPECT_NE(r.out.find("r1 = 1.0000"), std::string::npos) << r.out;
   EXPECT_NE(r.out.find("rate(k=1) = 2.0000"), std::string::npos);
   r = run("regularity --domain lshape --n 2 --format json");
   EXPECT_EQ(r.code, 0);
   EXPECT_NEAR(nlohmann::json::parse(r.out).at("r1").get<double>(), 0.5445, 5e-5);
   EXPECT_EQ(run("regularity").code, 1);
   EXPECT_EQ(run("regularity --theta-deg 400").code, 1);
}

TEST(Cli, Korn)
{
   CliRun r = run("korn --domain square --n 4 --format json");
   EXPECT_EQ(r.code, 0) << r.out;
   const double c = nlohmann::json::parse(r.out).at("levels")[0].at("c_h").get<double>();
   EXPECT_GT(c, 0.0);
   EXPECT_TRUE(std::isfinite(c));
   r = run("korn --domain square --n 4");
   EXPECT_NE(r.out.find("C_h"), std::string::npos);
}

TEST(Cli, ConfigFileFlagsWin)
{
   const fs::path dir = scratch_dir("config");
   std::ofstream(dir / "run.cfg") << "domain = square\nn = 10\nn-eigs = 2\nformat = json\n";
   const CliRun r = run("solve --config run.cfg --n-eigs 3", dir);
   EXPECT_EQ(r.code, 0) << r.out;
   EXPECT_EQ(nlohmann::json::parse(r.out).at("kappas").size(), 3u);
}
