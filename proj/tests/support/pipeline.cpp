#include "pipeline.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <iterator>

#include "cli.hpp"
#include "synthetic.hpp"

namespace cxg::testing {

namespace fs = std::filesystem;

int run_tool(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"cxgcorpus"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(int(argv.size()), argv.data());
}

int run_pipeline(const PipelineOptions& o) {
  const auto w = o.work;
  const std::string jobs = std::to_string(o.jobs);
  const std::string annotated = (w / "corpus.tsv").string();
  const std::string table = (w / "match" / "occurrences.tsv").string();
  const std::vector<std::vector<std::string>> steps = {
      {"annotate", "--input", o.wikitext.string(), "--resources", resource_dir().string(),
       "--out", annotated, "--jobs", jobs},
      {"match", "--annotated", annotated, "--inventory", o.inventory.string(), "--out",
       (w / "match").string(), "--jobs", jobs},
      {"build", "--annotated", annotated, "--table", table, "--band", o.band, "--seed", "3",
       "--out", (w / "build").string(), "--jobs", jobs},
      {"pairs", "--annotated", annotated, "--table", table, "--band", o.band, "--seed", "3",
       "--out", (w / "pairs").string(), "--jobs", jobs},
      {"baseline", "--train", (w / "pairs" / "train.tsv").string(), "--dev",
       (w / "pairs" / "dev.tsv").string(), "--test", (w / "pairs" / "test.tsv").string(),
       "--epochs", o.epochs, "--dim", o.dim, "--seed", "3", "--out", (w / "baseline").string(),
       "--jobs", jobs},
  };
  std::ostringstream sink;
  auto* saved = std::cout.rdbuf(sink.rdbuf());
  int code = 0;
  for (const auto& step : steps) {
    if ((code = run_tool(step)) != 0) break;
  }
  std::cout.rdbuf(saved);
  return code;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    out[fs::relative(e.path(), dir).generic_string()] =
        std::string(std::istreambuf_iterator<char>(in), {});
  }
  return out;
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("cxg_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace cxg::testing
