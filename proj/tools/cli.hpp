#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace bvn::cli {

struct RunConfig {
  std::string command;
  std::string prior = "right-haar";
  std::string params = "mu1,mu2,sigma1,sigma2,rho";
  long n = 3;
  double level = 0.95;
  long reps = -1;   // -1: per-command default
  long draws = -1;  // -1: per-command default
  std::uint64_t seed = 12345;
  std::string rho_grid = "-0.9:0.9:0.3";
  std::string sigma_case = "a";
  std::string input;
  std::string output;  // empty: stdout
  std::string format = "csv";
  bool quick = false;
};

// "start:stop:step" with positive step; empty when start > stop.
std::vector<double> parse_rho_grid(const std::string& text);

// Commands write their full output to `out` and return an exit code. They
// throw on invalid inputs; run_main translates exceptions to exit codes.
int cmd_fit(const RunConfig& cfg, std::ostream& out);
int cmd_sample(const RunConfig& cfg, std::ostream& out);
int cmd_table3(const RunConfig& cfg, std::ostream& out);
int cmd_coverage(const RunConfig& cfg, std::ostream& out);
int cmd_matching(const RunConfig& cfg, std::ostream& out);

int run_main(int argc, char** argv);

}  // namespace bvn::cli
