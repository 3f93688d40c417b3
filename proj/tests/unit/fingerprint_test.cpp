#include <doctest.h>

#include <numeric>
#include <set>

#include "padme/error.hpp"
#include "padme/fingerprint.hpp"
#include "padme/io.hpp"
#include "padme/rng.hpp"
#include "padme/synthetic.hpp"
#include "support/tempdir.hpp"

using namespace padme;

namespace {

Fingerprint bits(std::initializer_list<std::uint32_t> on) {
  Fingerprint fp(512, 0);
  for (auto b : on) fp.set(b);
  return fp;
}

}  // namespace

TEST_SUITE("fingerprint") {
  TEST_CASE("methane sets one bit") {
    const Fingerprint fp = ecfp(parse_smiles("C"), 2, 2048);
    CHECK(fp.popcount() == 1);
    CHECK(ecfp_identifiers(parse_smiles("C"), 2).size() == 1);
  }

  TEST_CASE("ethane sets two bits") {
    const auto ids = ecfp_identifiers(parse_smiles("CC"), 2);
    CHECK(std::set<std::uint32_t>(ids.begin(), ids.end()).size() == 2);
    const Fingerprint fp = ecfp(parse_smiles("CC"), 2, 2048);
    CHECK(fp.popcount() == 2);
  }

  TEST_CASE("deterministic and order independent") {
    CHECK(ecfp(parse_smiles("c1ccccc1O"), 2, 1024) == ecfp(parse_smiles("c1ccccc1O"), 2, 1024));
    CHECK(ecfp(parse_smiles("CCO"), 2, 2048) == ecfp(parse_smiles("OCC"), 2, 2048));
    CHECK(ecfp(parse_smiles("Oc1ccccc1"), 2, 2048) == ecfp(parse_smiles("c1ccc(O)cc1"), 2, 2048));
  }

  TEST_CASE("radius grows the identifier set") {
    const MolGraph g = parse_smiles("CC(=O)Nc1ccc(O)cc1");
    CHECK(ecfp_identifiers(g, 0).size() < ecfp_identifiers(g, 1).size());
    CHECK(ecfp_identifiers(g, 1).size() <= ecfp_identifiers(g, 2).size());
  }

  TEST_CASE("bit count must be supported") {
    CHECK_THROWS(ecfp(parse_smiles("C"), 2, 1000));
    for (std::uint32_t n : {512u, 1024u, 2048u, 4096u}) CHECK(ecfp(parse_smiles("CCN"), 2, n).n_bits() == n);
  }

  TEST_CASE("tanimoto") {
    CHECK(tanimoto(bits({1, 2, 3}), bits({2, 3, 4})) == doctest::Approx(0.5));
    CHECK(tanimoto(bits({1, 2, 3}), bits({1, 2, 3})) == 1.0);
    CHECK(tanimoto(bits({1, 2}), bits({3, 4})) == 0.0);
    CHECK(tanimoto(bits({}), bits({})) == 1.0);
    CHECK_THROWS(tanimoto(Fingerprint(512, 0), Fingerprint(1024, 0)));
  }

  TEST_CASE("hex round trip") {
    Rng rng(3);
    for (int i = 0; i < 20; ++i) {
      const Fingerprint fp = ecfp(parse_smiles(random_smiles(rng)), 2, 1024);
      const std::string hex = fp.to_hex();
      CHECK(hex.size() == 256);
      CHECK(Fingerprint::from_hex(hex, 2) == fp);
    }
    CHECK(bits({0}).to_hex().substr(0, 2) == "01");
    CHECK(bits({9}).to_hex().substr(0, 4) == "0002");
    CHECK_THROWS_AS(Fingerprint::from_hex("0g"), FormatError);
  }

  TEST_CASE("atom feature layout") {
    AtomFeatureLayout layout;
    CHECK(layout.width() == 36);
    const MolGraph g = parse_smiles("C(=O)[O-]");
    const AtomFeatureMatrix m = atom_features(g, layout);
    CHECK(m.rows == 3);
    CHECK(m.width == 36);
    for (std::size_t r = 0; r < m.rows; ++r) {
      const auto row = m.row(r);
      CHECK(std::accumulate(row.begin(), row.begin() + layout.degree_offset(), 0.0) == 1.0);
      CHECK(row[layout.degree_offset() + g.atoms[r].degree] == 1.0);
    }
    CHECK(m.row(0)[0] == 1.0);  // carbon
    CHECK(m.row(1)[2] == 1.0);  // oxygen
    CHECK(m.row(2)[layout.charge_offset()] == -1.0);
    std::size_t in_slices = 0;
    for (const auto& s : m.degree_slices) in_slices += s.size();
    CHECK(in_slices == 3);
  }

  TEST_CASE("unknown elements fall into the other column") {
    const AtomFeatureMatrix m = atom_features(parse_smiles("[Li]C"));
    CHECK(m.row(0)[20] == 1.0);
  }

  TEST_CASE("degree above the layout maximum names the atom") {
    AtomFeatureLayout layout;
    layout.max_degree = 3;
    CHECK_THROWS_WITH_AS(atom_features(parse_smiles("CC(C)(C)C"), layout), doctest::Contains("atom 1"), DataError);
  }

  TEST_CASE("graph feature file round trip") {
    testing::TempDir dir("pgft");
    Rng rng(11);
    std::vector<GraphFeatureRecord> recs;
    for (int i = 0; i < 5; ++i) {
      const MolGraph g = parse_smiles(random_smiles(rng));
      GraphFeatureRecord r;
      r.features = atom_features(g);
      for (const auto& nb : g.adjacency) r.adjacency.emplace_back(nb.begin(), nb.end());
      recs.push_back(std::move(r));
    }
    write_graph_features(dir / "a.pgft", recs);
    const auto back = read_graph_features(dir / "a.pgft");
    REQUIRE(back.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
      CHECK(back[i].features.values == recs[i].features.values);
      CHECK(back[i].adjacency == recs[i].adjacency);
    }
    write_graph_features(dir / "b.pgft", back);
    CHECK(io::read_bytes(dir / "a.pgft") == io::read_bytes(dir / "b.pgft"));

    auto bytes = io::read_bytes(dir / "a.pgft");
    bytes.push_back(0);
    io::write_bytes(dir / "c.pgft", bytes);
    CHECK_THROWS_AS(read_graph_features(dir / "c.pgft"), FormatError);
  }
}
