// rfq <subcommand> [--config file.json] [--out dir] [--seed N] [--key=value ...]

#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "rfq/cli/config.hpp"
#include "rfq/cli/run.hpp"

namespace {

// Leftover "--key=value" / "--key value" / "--flag" tokens.
std::vector<std::pair<std::string, std::string>> collect_overrides(const std::vector<std::string>& args) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t k = 0; k < args.size(); ++k) {
    const std::string& a = args[k];
    if (a.rfind("--", 0) != 0)
      rfq::fail(rfq::ErrorCode::ValidationError, "unexpected argument '" + a + "'", a);
    const auto eq = a.find('=');
    if (eq != std::string::npos) {
      out.emplace_back(a.substr(0, eq), a.substr(eq + 1));
    } else if (k + 1 < args.size() && args[k + 1].rfind("--", 0) != 0) {
      out.emplace_back(a, args[++k]);
    } else {
      out.emplace_back(a, "true");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-field quantization workbench"};
  app.allow_extras();
  std::string sub, config_path, out_dir;
  std::optional<std::uint64_t> seed;
  app.add_option("subcommand", sub, "airy-check | free | well | osc | residual | evolve | mc | mc-vs-pde | wigner-map")
      ->required();
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "master RNG seed");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : rfq::cli::kValidation;
  }

  const std::string error_dir = out_dir.empty() ? "out" : out_dir;
  try {
    std::optional<std::string> bytes;
    if (!config_path.empty()) {
      std::ifstream f(config_path, std::ios::binary);
      if (!f) rfq::fail(rfq::ErrorCode::ValidationError, "cannot read config file", "config");
      bytes.emplace(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
    }
    auto overrides = collect_overrides(app.remaining());
    if (!out_dir.empty()) overrides.emplace_back("out", nlohmann::json(out_dir).dump());
    if (seed) overrides.emplace_back("seed", std::to_string(*seed));
    const auto cfg = rfq::cli::parse_config(sub, bytes ? std::optional<std::string_view>(*bytes) : std::nullopt,
                                            overrides);
    return rfq::cli::run(cfg);
  } catch (const rfq::Error& e) {
    return rfq::cli::report_error(e, error_dir);
  }
}
