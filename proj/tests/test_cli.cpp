// End-to-end checks of the qmarg binary: exit codes and report fields.

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "qmarg/io.hpp"
#include "support.hpp"

using qmarg::io::Json;

namespace {

namespace fs = std::filesystem;

struct Run {
  int code = -1;
  std::string out;
  Json json() const { return Json::parse(out); }
};

Run qmarg_run(const std::string& args) {
  const std::string cmd = std::string(QMARG_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string data(const std::string& name) { return testing::data_path(name); }

fs::path work_dir() {
  const auto dir = fs::temp_directory_path() / "qmarg_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string write(const std::string& name, const std::string& text) {
  const auto path = (work_dir() / name).string();
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST_CASE("check: exit codes and certificates") {
  const auto bell = qmarg_run("check " + data("bell3.json") + " --report json");
  REQUIRE(bell.code == 1);
  const auto j = bell.json();
  CHECK(j["schema"] == "qmarg.report");
  CHECK(j["version"] == 1);
  CHECK(j["verdict"] == "incompatible");
  CHECK(j["pairing"].get<double>() < 0.0);
  CHECK(j["witness_min_eig"].get<double>() >= -1e-9);
  CHECK(j["t_star"].get<double>() == doctest::Approx(0.25).epsilon(1e-8));

  // The serialized witness verifies on its own.
  const auto wpath = write("bell_witness.json", j["witness"].dump());
  const auto v = qmarg_run("witness verify " + wpath + " --marginals " + data("bell3.json") + " --report json");
  CHECK(v.code == 1);
  CHECK(v.json()["pairing"].get<double>() == doctest::Approx(j["pairing"].get<double>()).epsilon(1e-12));

  CHECK(qmarg_run("check " + data("mixed3.json")).code == 0);
  const auto text = qmarg_run("check " + data("mixed3.json"));
  CHECK(text.out.find("verdict: compatible") != std::string::npos);
  CHECK(qmarg_run("check " + data("partial_chain.json")).code == 1);
}

TEST_CASE("check: invalid input and solver failure") {
  CHECK(qmarg_run("check " + data("../tests/data/bad_dims.json")).code == 2);
  CHECK(qmarg_run("check " + (work_dir() / "missing.json").string()).code == 2);
  CHECK(qmarg_run("check " + write("garbage.json", "{\"dims\": [2,")).code == 2);
  CHECK(qmarg_run("check " + data("bell3.json") + " --report yaml").code == 2);
  CHECK(qmarg_run("check " + data("bell3.json") + " --p 0.5").code == 2);
  CHECK(qmarg_run("").code == 2);
  CHECK(qmarg_run("check " + data("bell3.json") + " --max-iter 2").code == 3);
}

TEST_CASE("delta on the butterley generator") {
  const auto quarter = qmarg_run("delta " + data("butterley.json") + " --report json");
  CHECK(quarter.code == 0);
  CHECK(quarter.json()["verdict"] == "pass");
  CHECK(quarter.json().contains("warning"));
  CHECK(qmarg_run("check " + data("butterley.json")).code == 1);

  const auto one = qmarg_run("delta " + data("butterley.json") + " --p 1.0 --report json");
  CHECK(one.code == 1);
  CHECK(one.json()["min_eig"].get<double>() == doctest::Approx(-0.5).epsilon(1e-12));

  CHECK(qmarg_run("delta " + data("butterley.json") + " --p 0").code == 0);
  CHECK(qmarg_run("check " + data("butterley.json") + " --p 0").code == 0);
  CHECK(qmarg_run("delta " + data("partial_chain.json")).code == 2);
}

TEST_CASE("witness extract, verify and refine") {
  const auto zw = (work_dir() / "z_witness.json").string();
  const auto ex = qmarg_run("witness extract " + data("paper_Z.json") + " -o " + zw + " --report json");
  REQUIRE(ex.code == 0);
  CHECK(ex.json()["p_form_residual"].get<double>() <= 1e-9);
  CHECK(ex.json()["reconstruction_error"].get<double>() <= 1e-12);

  const auto v = qmarg_run("witness verify " + zw + " --marginals " + data("butterley.json") + " --report json");
  CHECK(v.code == 1);
  CHECK(v.json()["pairing"].get<double>() < 0.0);
  CHECK(v.json()["verdict"] == "incompatible");

  // Round trip through a copy of the file.
  const auto copy = (work_dir() / "z_copy.json").string();
  fs::copy_file(zw, copy, fs::copy_options::overwrite_existing);
  const auto v2 = qmarg_run("witness verify " + copy + " --marginals " + data("butterley.json") + " --report json");
  CHECK(std::abs(v2.json()["min_eig"].get<double>() - v.json()["min_eig"].get<double>()) <= 1e-10);
  CHECK(std::abs(v2.json()["p_form_residual"].get<double>() - v.json()["p_form_residual"].get<double>()) <= 1e-10);
  CHECK(std::abs(v2.json()["pairing"].get<double>() - v.json()["pairing"].get<double>()) <= 1e-10);

  CHECK(qmarg_run("witness verify " + zw + " --marginals " + data("mixed3.json")).code == 0);
  CHECK(qmarg_run("witness extract " + data("bell3.json")).code == 2);

  // |000><000| has a three-body component and is not of p-form.
  std::string rows;
  for (int r = 0; r < 8; ++r) {
    rows += r ? ", [" : "[";
    for (int c = 0; c < 8; ++c) rows += std::string(c ? ", " : "") + (r == 0 && c == 0 ? "1" : "0");
    rows += "]";
  }
  CHECK(qmarg_run("witness extract " + write("projector.json", "{\"dims\": [2, 2, 2], \"operator\": [" + rows + "]}"))
            .code == 2);

  std::string unit;
  for (int r = 0; r < 8; ++r) {
    unit += r ? ", [" : "[";
    for (int c = 0; c < 8; ++c) unit += std::string(c ? ", " : "") + (r == c ? "1" : "0");
    unit += "]";
  }
  const auto upath =
      write("unit.json", "{\"dims\": [2, 2, 2], \"operator_numerators\": [" + unit + "], \"operator_denominator\": 8}");
  const auto uw = (work_dir() / "unit_witness.json").string();
  REQUIRE(qmarg_run("witness extract " + upath + " -o " + uw).code == 0);
  const auto rf = qmarg_run("witness refine " + uw + " --report json");
  CHECK(rf.code == 0);
  CHECK(rf.json()["lambda_min_before"].get<double>() == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(std::abs(rf.json()["lambda_min_after"].get<double>()) <= 1e-12);
  CHECK(rf.json()["tangential"] == true);
}

TEST_CASE("identical particles") {
  const auto coleman = qmarg_run("identical check " + data("coleman_fermi.json") + " --particles 2 --report json");
  CHECK(coleman.code == 1);
  CHECK(coleman.json()["coleman_bound_satisfied"] == false);
  CHECK(coleman.json()["certificate_value"].get<double>() < 0.0);
  CHECK(qmarg_run("identical check " + data("singlet_fermi.json")).code == 0);
  CHECK(qmarg_run("identical check " + data("coleman_fermi.json") + " --particles 5").code == 2);
  CHECK(qmarg_run("identical check " + data("bell3.json")).code == 2);

  const auto id = qmarg_run("identical gse " + data("h_identity.json") + " --statistics bose --particles 3 --report json");
  CHECK(id.code == 0);
  CHECK(id.json()["energy"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));

  const auto zz = qmarg_run("identical gse " + data("h_zz.json") + " --statistics fermi --verify-exact --report json");
  CHECK(zz.code == 0);
  CHECK(zz.json()["energy"].get<double>() == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(zz.json()["exact_energy"].get<double>() == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(qmarg_run("identical gse " + data("h_zz.json") + " --statistics fermi --particles 3").code == 2);
  CHECK(qmarg_run("identical gse " + data("h_zz.json")).code == 2);
}

TEST_CASE("sampled marginals are compatible") {
  const auto path = (work_dir() / "sample.json").string();
  REQUIRE(qmarg_run("sample --dims 2,2,2 --seed 17 -o " + path).code == 0);
  CHECK(qmarg_run("check " + path).code == 0);
}
