#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rfq/cli/config.hpp"
#include "rfq/cli/csv.hpp"
#include "rfq/cli/run.hpp"

using namespace rfq;
using namespace rfq::cli;

namespace {

Error error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "no error raised";
  return Error(ErrorCode::InvalidArgument, "none");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST(Config, MinimalWellFile) {
  const auto cfg = parse_config(std::nullopt, R"({"subcommand":"well","K":1,"lambda":1,"m":1,"q":1,"a":3.14159})");
  EXPECT_EQ(cfg.subcommand(), Subcommand::well);
  EXPECT_DOUBLE_EQ(cfg.num("a"), 3.14159);
  EXPECT_EQ(cfg.integer("n_trunc"), 4);
  EXPECT_DOUBLE_EQ(cfg.params().hbar_eff(), 0.5);
}

TEST(Config, NegativeConstantNamesField) {
  const auto e = error_of([] { parse_config("well", R"({"K":-1})"); });
  EXPECT_EQ(e.code(), ErrorCode::ValidationError);
  EXPECT_EQ(e.context(), "K");
}

TEST(Config, FlagOverridesFile) {
  const auto cfg = parse_config("well", R"({"n_trunc":4})", {{"--n-trunc", "8"}});
  EXPECT_EQ(cfg.integer("n_trunc"), 8);
  const auto later = parse_config("well", std::nullopt, {{"--n-trunc", "8"}, {"n_trunc", "5"}});
  EXPECT_EQ(later.integer("n_trunc"), 5);
}

TEST(Config, ParseErrorReportsPosition) {
  const auto e = error_of([] { parse_config("well", "{\"a\": 1,,}"); });
  EXPECT_EQ(e.code(), ErrorCode::ParseError);
  EXPECT_EQ(e.context().rfind("byte ", 0), 0u);
  EXPECT_EQ(error_of([] { parse_config("well", "[1,2]"); }).code(), ErrorCode::ParseError);
}

TEST(Config, RejectsUnknownAndMistyped) {
  EXPECT_EQ(error_of([] { parse_config("well", R"({"nope":1})"); }).context(), "nope");
  EXPECT_EQ(error_of([] { parse_config("well", R"({"n_trunc":1.5})"); }).context(), "n_trunc");
  EXPECT_EQ(error_of([] { parse_config("well", R"({"nx":64})"); }).context(), "nx");
  EXPECT_EQ(error_of([] { parse_config("well", R"({"include_zero":1})"); }).context(), "include_zero");
  EXPECT_EQ(error_of([] { parse_config("free", R"({"x_min":3})"); }).context(), "x_min");
  EXPECT_EQ(error_of([] { parse_config("osc", R"({"n_patch":4})"); }).context(), "n_patch");
  EXPECT_EQ(error_of([] { parse_config("bogus", std::nullopt); }).context(), "subcommand");
  EXPECT_EQ(error_of([] { parse_config("free", R"({"subcommand":"well"})"); }).context(), "subcommand");
  EXPECT_EQ(error_of([] { parse_config(std::nullopt, "{}"); }).context(), "subcommand");
  EXPECT_EQ(error_of([] { parse_config("free", R"({"q":0})"); }).context(), "q");
}

TEST(Config, OverrideValuesAndKeys) {
  EXPECT_EQ(normalize_key("--n-trunc"), "n_trunc");
  EXPECT_EQ(override_value("8"), json(8));
  EXPECT_EQ(override_value("true"), json(true));
  EXPECT_EQ(override_value("[0.5, 1]"), json::array({0.5, 1}));
  EXPECT_EQ(override_value("runs/a"), json("runs/a"));
  const auto cfg = parse_config("airy-check", std::nullopt, {{"--betas", "[1, 3]"}});
  EXPECT_EQ(cfg.numbers("betas"), (std::vector<double>{1, 3}));
}

TEST(Config, LargeSeedSurvives) {
  const auto cfg = parse_config("mc", R"({"seed":18446744073709551615})");
  EXPECT_EQ(cfg.seed(), 18446744073709551615ull);
  EXPECT_EQ(error_of([] { parse_config("mc", R"({"seed":-1})"); }).context(), "seed");
}

TEST(Csv, NumbersRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1e22, 123456789.0}) EXPECT_EQ(std::stod(format_number(v)), v);
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  EXPECT_EQ(format_number(-INFINITY), "-inf");
}

TEST(Csv, QuotingAndLineEndings) {
  EXPECT_EQ(quote_field("plain"), "plain");
  EXPECT_EQ(quote_field("a,b"), "\"a,b\"");
  EXPECT_EQ(quote_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  CsvTable t({"n", "name", "v"});
  t.add_row({3LL, std::string("x,y"), 0.25});
  EXPECT_EQ(t.str(), "n,name,v\r\n3,\"x,y\",0.25\r\n");
  EXPECT_THROW(t.add_row({1.0}), Error);
}

TEST(Run, WellTablesAndResolvedEcho) {
  const auto dir = std::filesystem::temp_directory_path() / "rfq_cli_well";
  std::filesystem::remove_all(dir);
  const auto cfg = parse_config("well", std::nullopt, {{"out", json(dir.string()).dump()}});
  ASSERT_EQ(run(cfg), kOk);
  const auto levels = slurp(dir / "levels.csv");
  EXPECT_EQ(levels.substr(0, levels.find("\r\n")), "n,E_model,E_qm,rel_err");
  const auto echo = json::parse(slurp(dir / "config.resolved.json"));
  EXPECT_EQ(echo["n_trunc"], 4);
  EXPECT_EQ(echo["subcommand"], "well");
}

TEST(Run, NumericalFailureWritesErrorFile) {
  const auto dir = std::filesystem::temp_directory_path() / "rfq_cli_err";
  std::filesystem::remove_all(dir);
  // sigma this small leaves only underflowed samples next to beta = 0
  const auto cfg = parse_config("free", std::nullopt,
                                {{"out", json(dir.string()).dump()}, {"sigma", "0.001"}});
  EXPECT_EQ(run(cfg), kNumerical);
  const auto err = json::parse(slurp(dir / "error.json"));
  EXPECT_TRUE(err.contains("code"));
}
