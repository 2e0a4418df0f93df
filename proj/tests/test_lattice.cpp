#include <doctest.h>

#include <sstream>

#include "qdet/lattice.hpp"
#include "qdet/numerics.hpp"

using namespace qdet;
using Eigen::MatrixXd;

namespace {

LatticeSpec spec(Geometry g, int n, DetectorLayout lay, double gamma = 1.0) {
  LatticeSpec s;
  s.geometry = g;
  s.n = n;
  s.gamma = gamma;
  s.layout = lay;
  return s;
}

DetectorLayout end_layout() { return {}; }

}  // namespace

TEST_CASE("build: 3-site open chain with the end detector") {
  const Lattice lat = build(spec(Geometry::chain_open, 3, end_layout()));
  MatrixXd expected(3, 3);
  expected << 0, -1, 0, -1, 0, -1, 0, -1, 0;
  CHECK(lat.hamiltonian.matrix == expected);
  CHECK(lat.detectors.detected == std::vector<int>{2});
  CHECK(lat.detectors.system == std::vector<int>{0, 1});
}

TEST_CASE("build: complete graph includes the diagonal") {
  DetectorLayout lay;
  lay.kind = DetectorLayout::Kind::single;
  lay.site = 2;
  const Lattice lat = build(spec(Geometry::complete, 2, lay));
  MatrixXd expected(2, 2);
  expected << -1, -1, -1, -1;
  CHECK(lat.hamiltonian.matrix == expected);
  CHECK(lat.detectors.detected == std::vector<int>{1});
}

TEST_CASE("build: hopping amplitude lands on every bond exactly") {
  const Lattice lat = build(spec(Geometry::chain_open, 5, end_layout(), 2.0));
  for (int i = 0; i < 5; ++i) {
    CHECK(lat.hamiltonian.matrix(i, i) == 0.0);
    if (i + 1 < 5) CHECK(lat.hamiltonian.matrix(i, i + 1) == -2.0);
  }
  DetectorLayout lay;
  lay.kind = DetectorLayout::Kind::single;
  lay.site = 1;
  const Lattice mf = build(spec(Geometry::complete, 3, lay, 0.5));
  CHECK((mf.hamiltonian.matrix.array() == -0.5).all());
}

TEST_CASE("build: ring wraps around and flags odd sizes") {
  const Lattice lat = build(spec(Geometry::ring, 4, end_layout()));
  CHECK(lat.hamiltonian.matrix(0, 3) == -1.0);
  CHECK(lat.hamiltonian.matrix(3, 0) == -1.0);
  CHECK_FALSE(lat.ring_odd);
  CHECK(build(spec(Geometry::ring, 5, end_layout())).ring_odd);
}

TEST_CASE("build: square lattice equals the Kronecker sum") {
  const int n = 4;
  DetectorLayout lay;
  lay.kind = DetectorLayout::Kind::case2d;
  lay.case_id = 1;
  const Lattice lat = build(spec(Geometry::square_open, n, lay));

  const Lattice chain = build(spec(Geometry::chain_open, n, end_layout()));
  const Eigen::MatrixXcd hc = chain.hamiltonian.matrix.cast<Complex>();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  const Eigen::MatrixXcd sum = kron(hc, id) + kron(id, hc);
  CHECK((lat.hamiltonian.matrix.cast<Complex>() - sum).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("build: case-v on a 3x3 lattice detects the whole boundary") {
  DetectorLayout lay;
  lay.kind = DetectorLayout::Kind::case2d;
  lay.case_id = 5;
  const Lattice lat = build(spec(Geometry::square_open, 3, lay));
  CHECK(lat.detectors.detected.size() == 8);
  CHECK(lat.detectors.system == std::vector<int>{flat_index(3, 2, 2)});
}

TEST_CASE("build: detector layouts partition the sites") {
  std::vector<DetectorLayout> layouts;
  layouts.push_back(end_layout());
  {
    DetectorLayout l;
    l.kind = DetectorLayout::Kind::both_ends;
    layouts.push_back(l);
  }
  {
    DetectorLayout l;
    l.kind = DetectorLayout::Kind::block_end;
    l.block = 3;
    layouts.push_back(l);
  }
  {
    DetectorLayout l;
    l.kind = DetectorLayout::Kind::single;
    l.site = 4;
    layouts.push_back(l);
  }
  {
    DetectorLayout l;
    l.kind = DetectorLayout::Kind::explicit_list;
    l.sites = {2, 7, 7, 5};
    layouts.push_back(l);
  }
  for (const auto& lay : layouts) {
    const Lattice lat = build(spec(Geometry::chain_open, 9, lay));
    std::vector<bool> seen(9, false);
    for (int i : lat.detectors.detected) {
      CHECK_FALSE(seen[i]);
      seen[i] = true;
    }
    for (int i : lat.detectors.system) {
      CHECK_FALSE(seen[i]);
      seen[i] = true;
    }
    CHECK(std::count(seen.begin(), seen.end(), true) == 9);
    CHECK(std::is_sorted(lat.detectors.detected.begin(),
                         lat.detectors.detected.end()));
    CHECK(std::is_sorted(lat.detectors.system.begin(),
                         lat.detectors.system.end()));
  }
}

TEST_CASE("build: rejects out-of-range detectors") {
  DetectorLayout lay;
  lay.kind = DetectorLayout::Kind::single;
  lay.site = 10;
  CHECK_THROWS_AS(build(spec(Geometry::chain_open, 5, lay)), ConfigError);
  lay.kind = DetectorLayout::Kind::explicit_list;
  lay.sites = {0};
  CHECK_THROWS_AS(build(spec(Geometry::chain_open, 5, lay)), ConfigError);
}

TEST_CASE("load_graph: two-node chain") {
  std::istringstream in("sites 2\n1 2 1.0\ndetect 2\n");
  const Lattice lat = load_graph(in, "mem");
  MatrixXd expected(2, 2);
  expected << 0, -1, -1, 0;
  CHECK(lat.hamiltonian.matrix == expected);
  CHECK(lat.detectors.detected == std::vector<int>{1});
}

TEST_CASE("load_graph: ring written as an edge list matches build") {
  std::istringstream in(
      "# a 4-ring\nsites 4\n1 2 1\n2 3 1\n3 4 1\n4 1 1\ndetect 4\n");
  const Lattice lat = load_graph(in, "mem");
  const Lattice ref = build(spec(Geometry::ring, 4, end_layout()));
  CHECK(lat.hamiltonian.matrix == ref.hamiltonian.matrix);
  CHECK(lat.detectors.detected == ref.detectors.detected);
}

TEST_CASE("load_graph: complete graph with self-loops matches build") {
  std::ostringstream text;
  text << "sites 5\n";
  for (int i = 1; i <= 5; ++i)
    for (int j = i; j <= 5; ++j) text << i << ' ' << j << " 1\n";
  text << "detect 5\n";
  std::istringstream in(text.str());
  const Lattice lat = load_graph(in, "mem");
  DetectorLayout lay;
  lay.kind = DetectorLayout::Kind::single;
  lay.site = 5;
  const Lattice ref = build(spec(Geometry::complete, 5, lay));
  CHECK(lat.hamiltonian.matrix == ref.hamiltonian.matrix);
}

TEST_CASE("load_graph: errors carry line numbers") {
  std::istringstream bad1("sites 3\n1 2\n");
  CHECK_THROWS_WITH_AS(load_graph(bad1, "g"), doctest::Contains("g:2"),
                       ParseError);

  std::istringstream bad2("sites 3\n1 2 1.0\n2 1 0.5\n");
  try {
    load_graph(bad2, "g");
    FAIL("expected a conflict");
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
  }

  std::istringstream bad3("sites 3\n1 2 1.0\ndetect 9\n");
  CHECK_THROWS_AS(load_graph(bad3, "g"), ParseError);

  std::istringstream bad4("1 2 1.0\n");
  CHECK_THROWS_AS(load_graph(bad4, "g"), ParseError);
}

TEST_CASE("load_graph: restating an edge with the same weight is fine") {
  std::istringstream in("sites 2\n1 2 1.0\n2 1 1.0\ndetect 1\n");
  CHECK_NOTHROW(load_graph(in, "mem"));
}
