#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "../tools/cli.hpp"
#include "rgtlps/compound.hpp"

using namespace rgtlps;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "rgtlps");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("rgtlps_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path p = scratch_dir() / name;
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const json& param(const json& fit, const std::string& name) {
  for (const auto& p : fit["parameters"])
    if (p["name"] == name) return p;
  FAIL("missing parameter " << name);
  static const json none;
  return none;
}

}  // namespace

TEST_CASE("dataset loading") {
  const auto p = write_file("header.csv", "value\n0.25\n0.5, 0.75\n\n0.125;0.375\n");
  const cli::Dataset d = cli::load_dataset(p.string());
  CHECK(d.values == std::vector<double>{0.25, 0.5, 0.75, 0.125, 0.375});
  CHECK(d.lines == std::vector<std::size_t>{2, 3, 3, 5, 5});

  const auto bad = write_file("bad.txt", "0.1\n0.2\n0.3x\n");
  try {
    cli::load_dataset(bad.string());
    FAIL("malformed file accepted");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
  const auto edge = write_file("edge.txt", "0\n0.5\n1\n");
  CHECK_THROWS(cli::load_dataset(edge.string()));
  const cli::Dataset c = cli::load_dataset(edge.string(), 1e-6);
  CHECK(c.values == std::vector<double>{1e-6, 0.5, 1.0 - 1e-6});
  CHECK(c.clamped == 2);
  const auto outside = write_file("outside.txt", "0.5\n1.5\n");
  CHECK_THROWS(cli::load_dataset(outside.string(), 1e-6));
}

TEST_CASE("fit recovers the synthetic truth") {
  const Outcome ml = run_cli({"fit", RGTLPS_SYNTHETIC, "--model", "rgtl-geo"});
  REQUIRE(ml.code == 0);
  const json j = json::parse(ml.out);
  CHECK(j["model"] == "rgtl-geo");
  CHECK(j["n"] == 5000);
  CHECK(j["convergence"]["converged"] == true);
  const double truth[] = {1.4, 0.9, 0.9};
  const char* names[] = {"alpha", "nu", "theta"};
  for (int i = 0; i < 3; ++i) {
    const json& p = param(j, names[i]);
    CAPTURE(names[i]);
    CHECK(std::fabs(p["estimate"].get<double>() - truth[i]) < 3.0 * p["std_error"].get<double>());
  }
  CHECK(j["ks"]["pvalue"].get<double>() > 0.01);

  const Outcome em = run_cli({"fit", RGTLPS_SYNTHETIC, "--model", "rgtl-geo", "--method", "em"});
  REQUIRE(em.code == 0);
  const json e = json::parse(em.out);
  CHECK(e["method"] == "em");
  CHECK(!e["loglik_trace"].empty());
  for (const char* n : names)
    CHECK(std::fabs(param(e, n)["estimate"].get<double>() - param(j, n)["estimate"].get<double>()) < 1e-3);
}

TEST_CASE("fit input errors") {
  CHECK(run_cli({"fit", (scratch_dir() / "missing.txt").string()}).code == 1);
  const auto bad = write_file("bad_row.txt", "0.2\n0.4\nabc\n");
  const Outcome o = run_cli({"fit", bad.string()});
  CHECK(o.code == 1);
  CHECK(o.err.find(":3:") != std::string::npos);
  CHECK(run_cli({"fit", bad.string(), "--model", "weibull"}).code == 1);
  CHECK(run_cli({"fit", RGTLPS_SYNTHETIC, "--model", "rgtl-log", "--m", "3"}).code == 1);
  CHECK(run_cli({"fit"}).code == 1);
}

TEST_CASE("fit tsv output") {
  const Outcome o = run_cli({"fit", RGTLPS_SYNTHETIC, "--model", "tl", "--output-format", "tsv"});
  REQUIRE(o.code == 0);
  CHECK(o.out.rfind("model\ttl\n", 0) == 0);
  CHECK(o.out.find("param\tnu\t") != std::string::npos);
}

TEST_CASE("sample") {
  const fs::path a = scratch_dir() / "a.txt", b = scratch_dir() / "b.txt";
  for (const fs::path& p : {a, b})
    REQUIRE(run_cli({"sample", "--model", "rgtl-poi", "--alpha", "0.8", "--nu", "1.5", "--theta", "2", "--n", "5",
                     "--seed", "11", "--out", p.string()})
                .code == 0);
  CHECK(slurp(a) == slurp(b));
  const std::string text = slurp(a);
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);
  std::istringstream lines(text);
  for (double v; lines >> v;) CHECK((v > 0.0 && v < 1.0));

  const fs::path empty = scratch_dir() / "empty.txt";
  REQUIRE(run_cli({"sample", "--model", "beta", "--a", "2", "--b", "3", "--n", "0", "--out", empty.string()}).code ==
          0);
  CHECK(fs::exists(empty));
  CHECK(fs::file_size(empty) == 0);

  CHECK(run_cli({"sample", "--model", "tl", "--nu", "1", "--n", "3", "--out", "/nonexistent-dir/x.txt"}).code == 1);
  CHECK(run_cli({"sample", "--model", "rgtl-log", "--alpha", "1", "--nu", "1", "--theta", "1.5", "--n", "3"}).code ==
        1);
  CHECK(run_cli({"sample", "--model", "rgtl-geo", "--alpha", "1", "--nu", "1", "--n", "3"}).code == 1);
}

TEST_CASE("eval") {
  const std::vector<std::string> geo{"--model", "rgtl-geo", "--alpha", "1.3", "--nu", "0.7", "--theta", "0.6"};
  auto with = [&](std::vector<std::string> extra) {
    std::vector<std::string> v{"eval"};
    v.insert(v.end(), geo.begin(), geo.end());
    v.insert(v.end(), extra.begin(), extra.end());
    return run_cli(v);
  };
  const Outcome cdf = with({"--what", "cdf", "--x", "0,1"});
  REQUIRE(cdf.code == 0);
  const json c = json::parse(cdf.out);
  CHECK(c["rows"][0]["value"].get<double>() == 0.0);
  CHECK(c["rows"][1]["value"].get<double>() == 1.0);

  const Outcome h = with({"--what", "hazard", "--x", "0"});
  REQUIRE(h.code == 0);
  // Geometric: h(0) = theta g(0) A'(theta) / A(theta) = nu (2 - alpha) / (1 - theta).
  CHECK(json::parse(h.out)["rows"][0]["value"].get<double>() ==
        doctest::Approx(0.7 * 0.7 / 0.4).epsilon(1e-13));
  const Outcome hgrid = with({"--what", "hazard", "--points", "11"});
  CHECK(json::parse(hgrid.out)["rows"].size() == 10);

  const Outcome q = with({"--what", "quantile", "--x", "1e-6,0.01,0.3,0.5,0.9,0.999999"});
  REQUIRE(q.code == 0);
  std::string xs;
  std::vector<double> probs;
  for (const auto& row : json::parse(q.out)["rows"]) {
    probs.push_back(row["x"].get<double>());
    std::ostringstream s;
    s.precision(17);
    s << row["value"].get<double>();
    xs += (xs.empty() ? "" : ",") + s.str();
  }
  const Outcome back = with({"--what", "cdf", "--x", xs});
  REQUIRE(back.code == 0);
  const json rows = json::parse(back.out)["rows"];
  for (std::size_t i = 0; i < probs.size(); ++i)
    CHECK(std::fabs(rows[i]["value"].get<double>() - probs[i]) < 1e-9);

  const Outcome bad = with({"--what", "pdf", "--x", "0.5,1.5"});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("row 1:") != std::string::npos);
  CHECK(json::parse(bad.out)["rows"][1]["value"].is_null());

  const Outcome tsv = with({"--what", "pdf", "--x", "0.5", "--output-format", "tsv"});
  const CompoundModel m(RgtlParams(1.3, 0.7), PsFamily::geometric(), 0.6);
  std::istringstream t(tsv.out);
  std::string header;
  std::getline(t, header);
  double x = 0, v = 0;
  t >> x >> v;
  CHECK(header == "x\tpdf");
  CHECK(v == compound_pdf(m, 0.5));
}

TEST_CASE("compare") {
  const Outcome one = run_cli({"compare", RGTLPS_SYNTHETIC, "--models", "beta"});
  REQUIRE(one.code == 0);
  const json j = json::parse(one.out);
  REQUIRE(j["ranking"].size() == 1);
  CHECK(j["ranking"][0]["model"] == "beta");
  CHECK(j["ranking"][0]["rank"] == 1);

  const Outcome three = run_cli({"compare", RGTLPS_SYNTHETIC, "--models", "tl,rgtl-geo,kumaraswamy"});
  REQUIRE(three.code == 0);
  const json r = json::parse(three.out)["ranking"];
  REQUIRE(r.size() == 3);
  CHECK(r[0]["model"] == "rgtl-geo");
  CHECK(r[0]["aic"].get<double>() <= r[1]["aic"].get<double>());
  CHECK(r[1]["aic"].get<double>() <= r[2]["aic"].get<double>());

  CHECK(run_cli({"compare", RGTLPS_SYNTHETIC, "--models", "beta", "--m", "2"}).code == 1);
  CHECK(run_cli({"compare", RGTLPS_SYNTHETIC, "--models", "beta,rgtl-bin", "--m", "2"}).code == 0);
}

TEST_CASE("installed binary is deterministic") {
  const fs::path a = scratch_dir() / "run1.json", b = scratch_dir() / "run2.json";
  const std::string base = std::string(RGTLPS_TOOL) + " fit " + RGTLPS_SYNTHETIC + " --model rgtl-log --seed 5 > ";
  REQUIRE(std::system((base + a.string()).c_str()) == 0);
  REQUIRE(std::system((base + b.string()).c_str()) == 0);
  CHECK(!slurp(a).empty());
  CHECK(slurp(a) == slurp(b));
  CHECK(std::system((std::string(RGTLPS_TOOL) + " fit /nonexistent.txt 2>/dev/null").c_str()) != 0);
}
