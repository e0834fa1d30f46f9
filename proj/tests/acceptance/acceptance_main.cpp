// Runs verify-all twice with one seed, prints one line per criterion and
// checks that the two manifests are byte-identical.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "lojlab/harness/commands.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

int main() {
  const fs::path root = fs::path(LOJLAB_BINARY_DIR) / "acceptance_runs";
  fs::remove_all(root);

  lojlab::harness::GlobalOptions a, b;
  a.out = root / "first";
  b.out = root / "second";
  a.quiet = b.quiet = true;
  std::ostringstream sink;
  const int code_a = lojlab::harness::cmd_verify_all(a, sink);
  const int code_b = lojlab::harness::cmd_verify_all(b, sink);

  const std::string manifest_a = slurp(a.out / "manifest.json");
  const std::string manifest_b = slurp(b.out / "manifest.json");
  const auto m = nlohmann::ordered_json::parse(manifest_a);
  const auto timings = nlohmann::ordered_json::parse(slurp(a.out / "timings.json"));

  bool all = true;
  for (const auto& c : m["criteria"]) {
    const bool ok = c["passed"].get<bool>();
    all = all && ok;
    const std::string id = std::to_string(c["id"].get<int>());
    std::cout << (ok ? "PASS" : "FAIL") << "  criterion " << id << ": " << c["name"].get<std::string>() << " ("
              << timings[id]["seconds"].get<double>() << " s, budget " << c["budget_seconds"].get<double>()
              << " s)\n";
  }
  const bool same = !manifest_a.empty() && manifest_a == manifest_b;
  all = all && same;
  std::cout << (same ? "PASS" : "FAIL") << "  criterion 11: determinism (two verify-all runs, byte-identical manifests)\n";
  std::cout << "verify-all exit codes: " << code_a << ", " << code_b << '\n';
  return all ? 0 : 1;
}
