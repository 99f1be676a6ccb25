// End-to-end checks of the command-line surface: exit codes and output files.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int failures = 0;

void expect(bool ok, const std::string& what) {
  std::printf("[%s] %s\n", ok ? "ok" : "FAIL", what.c_str());
  if (!ok) ++failures;
}

int run(const std::string& cmd) {
  const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: cli_smoke <path-to-cli>\n");
    return 1;
  }
  const std::string cli = argv[1];
  const fs::path base = fs::temp_directory_path() / "totalproj_cli_smoke";
  fs::remove_all(base);
  fs::create_directories(base);

  // solve: toy system converges and leaves a trace file.
  const fs::path sys_csv = base / "toy.csv";
  {
    std::ofstream out(sys_csv);
    out << "phi_0,v,d\n2,1,0.5\n1,2,0.5\n";
  }
  expect(run(cli + " --out " + (base / "solve").string() + " solve " +
             sys_csv.string() + " --iters 200") == 0,
         "solve exits 0");
  const fs::path trace = base / "solve" / "solve_trace.csv";
  expect(fs::exists(trace), "solve writes a trace CSV");
  expect(first_line(trace) == "k,err,g,theta,alpha,skipped", "trace header");

  // missing input file is an input error.
  expect(run(cli + " solve " + (base / "absent.csv").string()) == 1,
         "missing system exits 1");

  // malformed flag values are input errors too.
  expect(run(cli + " solve " + sys_csv.string() + " --mode sideways") != 0,
         "bad mode rejected");

  // experiment via config file.
  const fs::path config = base / "outlier.json";
  {
    std::ofstream out(config);
    out << R"({"experiment":"outlier","m":8,"repetitions":10,"seed":5})";
  }
  expect(run(cli + " --out " + (base / "exp").string() +
             " experiment --config " + config.string() + " outlier") == 0,
         "experiment with config exits 0");
  expect(fs::exists(base / "exp" / "outlier_errors.csv"), "experiment CSV written");

  // unreachable oracle tolerance trips the run-time assertion path.
  expect(run(cli + " --seed 4 --out " + (base / "rl").string() +
             " experiment rl --m 5 --n 2 --reps 1 --iters 40 --tolerance 1e-9") == 2,
         "impossible tolerance exits 2");

  if (failures == 0) {
    std::printf("cli smoke passed\n");
    return 0;
  }
  return 1;
}
