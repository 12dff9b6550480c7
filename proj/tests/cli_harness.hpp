#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace harness {

struct Result {
  int rc = 0;
  std::string out;
  std::string err;
};

inline Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Result r;
  r.rc = hashemb::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Output with wall-clock fields removed.
inline std::string without_timing(const std::string& text) {
  static const std::regex timing("elapsed_s[= ][0-9.]+");
  return std::regex_replace(text, timing, "elapsed_s");
}

}  // namespace harness
