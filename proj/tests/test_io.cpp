#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "tlab/io.hpp"
#include "tlab/linalg.hpp"

using namespace tlab;

TEST_CASE("hmat text roundtrips bit-exactly") {
  const CMat u = random_unitary(4, 99).mat();
  const CMat back = parse_hmat(write_hmat(u));
  REQUIRE(back.rows() == 4);
  CHECK(back == u);  // shortest-roundtrip formatting is lossless

  const CMat h = random_hermitian(3, 100, 2.0).mat();
  CHECK(parse_hmat(write_hmat(h)) == h);
}

TEST_CASE("hmat entries cover sign and exponent forms") {
  const CMat m = parse_hmat(
      "HMAT 1 2\n"
      "1.5+0.25j -0.3-1.2j\n"
      "2.5 1.5e+2-2e-3j\n");
  CHECK(m(0, 0) == std::complex<double>(1.5, 0.25));
  CHECK(m(0, 1) == std::complex<double>(-0.3, -1.2));
  CHECK(m(1, 0) == std::complex<double>(2.5, 0.0));
  CHECK(m(1, 1) == std::complex<double>(150.0, -0.002));
}

TEST_CASE("hmat parser rejects malformed input") {
  CHECK_THROWS_AS(parse_hmat("XMAT 1 2\n0+0j 0+0j\n0+0j 0+0j\n"), Error);
  CHECK_THROWS_AS(parse_hmat("HMAT 2 1\n0+0j\n"), Error);
  CHECK_THROWS_AS(parse_hmat("HMAT 1 0\n"), Error);
  CHECK_THROWS_AS(parse_hmat("HMAT 1 2\n0+0j 0+0j\n0+0j\n"), Error);
  CHECK_THROWS_AS(parse_hmat("HMAT 1 1\n0+0j\nextra\n"), Error);
  CHECK_THROWS_AS(parse_hmat("HMAT 1 1\nnope+1j\n"), Error);
}

TEST_CASE("hermitian reads enforce symmetry unless asked otherwise") {
  const std::string skewed =
      "HMAT 1 2\n"
      "1+0j 0.5+0.2j\n"
      "0.5+0.3j 2+0j\n";  // off-diagonal conjugates disagree
  CHECK_THROWS_AS(parse_hmat_hermitian(skewed), Error);
  const HermitianMatrix h = parse_hmat_hermitian(skewed, true);
  CHECK(std::abs(h.mat()(0, 1) - std::complex<double>(0.5, -0.05)) < 1e-15);
  CHECK(std::abs(h.mat()(1, 0) - std::complex<double>(0.5, 0.05)) < 1e-15);

  const UnitaryMatrix u = parse_hmat_unitary(write_hmat(random_unitary(3, 7).mat()));
  CHECK((u.mat().adjoint() * u.mat() - CMat::Identity(3, 3)).norm() < 1e-12);
}

TEST_CASE("step functions roundtrip through STEP v1") {
  const StepFunction f({0.0, 0.25, 0.8}, {2.0, -0.5, 1.0});
  const StepFunction g = step_from_json(step_to_json(f));
  CHECK(g.breakpoints() == f.breakpoints());
  CHECK(g.values() == f.values());

  CHECK_THROWS_AS(step_from_json(parse_json("[1,2]", "STEP")), Error);
  CHECK_THROWS_AS(step_from_json(parse_json("{\"breakpoints\":[0]}", "STEP")),
                  Error);
  CHECK_THROWS_AS(
      step_from_json(parse_json("{\"breakpoints\":[0,0.5],\"values\":[1]}",
                                "STEP")),
      InvalidArgument);
}

TEST_CASE("spectra parse from plain arrays") {
  const Spectrum s = spectrum_from_json(parse_json("[2.5,-0.5]", "spectrum"));
  CHECK(s.size() == 2);
  CHECK(s[0] == 2.5);
  CHECK_THROWS_AS(spectrum_from_json(parse_json("{}", "spectrum")), Error);
  CHECK_THROWS_AS(spectrum_from_json(parse_json("[0,1]", "spectrum")),
                  InvalidArgument);
  CHECK_THROWS_AS(parse_json("[0,", "spectrum"), Error);
}

TEST_CASE("horn triples roundtrip through JSON") {
  const auto& triples = gen_all(3);
  const auto back = triples_from_json(triples_to_json(triples));
  REQUIRE(back.size() == triples.size());
  for (std::size_t j = 0; j < back.size(); ++j) CHECK(back[j] == triples[j]);
}

TEST_CASE("certificates serialize with their violations") {
  const auto cert = check_horn(Spectrum({2.5, -0.5}), Spectrum({0.0, 0.0}),
                               Spectrum({2.5, -0.5}), 1e-9);
  const ordered_json j = certificate_to_json(cert);
  CHECK(j["feasible"] == cert.feasible);
  CHECK(j["checked_count"] == cert.checked_count);
  CHECK(j["violations"].size() == cert.violations.size());
}

TEST_CASE("solve reports embed matrices as HMAT strings") {
  const HermitianMatrix x = random_hermitian(2, 11, 0.8);
  const HermitianMatrix y = random_hermitian(2, 12, 0.8);
  SolveOptions opts;
  const SolveReport r = solve(x, y, opts);
  const ordered_json j = solve_report_to_json(r, ordered_json{{"seed", 0}});

  CHECK(j["n"] == 2);
  CHECK(j["success"] == r.success);
  CHECK(j["branch_shift"].is_null());
  CHECK(j["horn_feasible"].is_boolean());
  const UnitaryMatrix u = parse_hmat_unitary(j["U"].get<std::string>());
  CHECK((u.mat() - r.U.mat()).norm() == 0.0);
  const HermitianMatrix z =
      parse_hmat_hermitian(j["Z"].get<std::string>());
  CHECK((z.mat() - r.Z.mat()).norm() < 1e-15);

  // Identical runs serialize to identical bytes.
  const SolveReport r2 = solve(x, y, opts);
  CHECK(solve_report_to_json(r2, ordered_json{{"seed", 0}}).dump(2) ==
        j.dump(2));
}

TEST_CASE("truncation ladders serialize to JSON and CSV") {
  std::vector<double> d{1.0, 0.5, 0.25, 0.125};
  CMat m = CMat::Zero(4, 4);
  for (int j = 0; j < 4; ++j) m(j, j) = d[static_cast<std::size_t>(j)];
  const HermitianMatrix x(m);
  const auto levels = triad_sequence(x, x, {2, 4});

  const ordered_json j = levels_to_json(levels, ordered_json::object());
  REQUIRE(j["levels"].size() == 2);
  CHECK(j["levels"][0]["k"] == 2);
  CHECK(j["levels"][1]["d_k"] == levels[1].d_k);

  const std::string csv = levels_to_csv(levels);
  CHECK(csv.rfind("k,d_k,err_trunc,err_thompson,residual\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("factor reports carry levels, f, and the integral certificate") {
  const StepFunction la({0.0, 0.5}, {0.4, -0.2});
  const StepFunction lb = StepFunction::constant(0.3);
  FactorOptions opts;
  opts.decommute = false;
  const FactorReport rep = factor_pipeline(la, lb, {2, 4}, opts);
  const ordered_json j = factor_report_to_json(rep, ordered_json::object());

  REQUIRE(j["levels"].size() == 2);
  CHECK(j["levels"][0]["m"] == 2);
  CHECK(j["levels"][0]["moment_gaps"].size() == 5);
  CHECK(j["f"]["values"].size() == rep.f.pieces());
  CHECK(j["integral_horn"]["feasible"] == rep.integral_horn.feasible);

  const FactorReport rep2 = factor_pipeline(la, lb, {2, 4}, opts);
  CHECK(factor_report_to_json(rep2, ordered_json::object()).dump() ==
        j.dump());
}

TEST_CASE("text file helpers report unusable paths") {
  CHECK_THROWS_AS(read_text_file("/nonexistent/nope.txt"), Error);
  CHECK_THROWS_AS(write_text_file("/nonexistent/nope.txt", "x"), Error);
}
