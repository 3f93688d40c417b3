#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "padme/error.hpp"
#include "padme/io.hpp"
#include "padme/protein.hpp"
#include "padme/rng.hpp"
#include "padme/synthetic.hpp"
#include "support/tempdir.hpp"

using namespace padme;

namespace {

double total(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_SUITE("protein") {
  TEST_CASE("single residue sequence") {
    const ProteinDescriptor d = psc("AAA", false);
    CHECK(d.values().size() == 8421);
    CHECK(d.aac()[0] == 1.0);
    CHECK(d.dc()[0] == 1.0);
    CHECK(d.tc()[0] == 1.0);
    CHECK(std::count_if(d.values().begin(), d.values().end(), [](double v) { return v != 0.0; }) == 3);
    CHECK_FALSE(d.phosphorylated());
    CHECK(d.values().back() == 0.0);
  }

  TEST_CASE("every residue once") {
    const ProteinDescriptor d = psc("ACDEFGHIKLMNPQRSTVWY", true);
    for (double v : d.aac()) CHECK(v == doctest::Approx(0.05));
    CHECK(d.phosphorylated());
    CHECK(d.values().back() == 1.0);
  }

  TEST_CASE("block layout") {
    // "ACD": dipeptides AC and CD, one tripeptide ACD.
    const ProteinDescriptor d = psc("ACD", false);
    CHECK(d.dc()[0 * 20 + 1] == 0.5);
    CHECK(d.dc()[1 * 20 + 2] == 0.5);
    CHECK(d.tc()[(0 * 20 + 1) * 20 + 2] == 1.0);
    CHECK(residue_index('Y') == 19);
    CHECK(residue_index('B') == -1);
  }

  TEST_CASE("blocks are frequency distributions") {
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
      const ProteinDescriptor d = psc(random_protein(rng, 3 + rng.below(400)), false);
      CHECK(std::abs(total(d.aac()) - 1.0) < 1e-12);
      CHECK(std::abs(total(d.dc()) - 1.0) < 1e-12);
      CHECK(std::abs(total(d.tc()) - 1.0) < 1e-12);
    }
  }

  TEST_CASE("invalid sequences") {
    CHECK_THROWS_WITH_AS(psc("ACXDE", false), doctest::Contains("position 3"), DataError);
    CHECK_THROWS_AS(psc("AC", false), DataError);
    CHECK_THROWS_AS(psc("acd", false), DataError);
  }

  TEST_CASE("sequence and descriptor files round trip") {
    testing::TempDir dir("psc");
    const std::vector<ProteinEntry> entries = {{"P1", false, "ACDEFGH"}, {"P2", true, "MKKLLPT"}};
    write_sequence_file(dir / "s.tsv", entries);
    const auto back = read_sequence_file(dir / "s.tsv");
    REQUIRE(back.size() == 2);
    CHECK(back[1].id == "P2");
    CHECK(back[1].phosphorylated);
    CHECK(back[1].sequence == "MKKLLPT");

    DescriptorTable t;
    for (const auto& e : entries) {
      t.ids.push_back(e.id);
      t.descriptors.push_back(psc(e.sequence, e.phosphorylated));
    }
    write_descriptor_table(dir / "a.pscd", t);
    const DescriptorTable r = read_descriptor_table(dir / "a.pscd");
    CHECK(r.ids == t.ids);
    CHECK(r.descriptors == t.descriptors);
    write_descriptor_table(dir / "b.pscd", r);
    CHECK(io::read_bytes(dir / "a.pscd") == io::read_bytes(dir / "b.pscd"));
  }

  TEST_CASE("malformed sequence file") {
    testing::TempDir dir("psc-bad");
    io::write_text(dir / "s.tsv", "P1\t2\tACD\n");
    CHECK_THROWS_WITH_AS(read_sequence_file(dir / "s.tsv"), doctest::Contains(":1:"), DataError);
    io::write_text(dir / "s.tsv", "P1\t0\tACD\textra\n");
    CHECK_THROWS_AS(read_sequence_file(dir / "s.tsv"), DataError);
  }

  TEST_CASE("flag column may be omitted") {
    testing::TempDir dir("psc-two");
    io::write_text(dir / "s.tsv", "P1\tACDE\nP2\t1\tKLM\n");
    const auto e = read_sequence_file(dir / "s.tsv");
    REQUIRE(e.size() == 2);
    CHECK_FALSE(e[0].phosphorylated);
    CHECK(e[0].sequence == "ACDE");
    CHECK(e[1].phosphorylated);
  }
}
