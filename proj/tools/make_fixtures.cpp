// Writes the bundled synthetic fixtures:
//   <dir>/interactions.csv, <dir>/sequences.tsv
//   <dir>/multitask/{interactions.csv,sequences.tsv,assays.tsv}
#include <cstdio>
#include <filesystem>
#include <string>

#include "padme/dataset.hpp"
#include "padme/io.hpp"
#include "padme/synthetic.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <fixture dir>\n", argv[0]);
    return 2;
  }
  const fs::path dir = argv[1];
  fs::create_directories(dir / "multitask");

  padme::SyntheticOptions o;
  o.n_compounds = 48;
  o.n_proteins = 12;
  o.density = 0.4;
  o.family_size = 2;
  o.seed = 7;
  padme::Dataset ds = padme::make_synthetic(o);
  padme::write_interactions(dir / "interactions.csv", ds);
  // Two imprecise measurements, discarded on load.
  std::string text = padme::io::read_text(dir / "interactions.csv");
  text += ds.compounds[0] + "," + ds.proteins[5].id + ",0,>10000\n";
  text += ds.compounds[3] + "," + ds.proteins[7].id + ",0,<1\n";
  padme::io::write_text(dir / "interactions.csv", text);
  padme::write_sequence_file(dir / "sequences.tsv", ds.proteins);

  // Multitask set: assays grouped onto tasks, inactive calls recorded as
  // 1000000 and remapped to 1000 by configuration.
  padme::SyntheticOptions m;
  m.n_compounds = 30;
  m.n_proteins = 6;
  m.density = 0.6;
  m.n_tasks = 4;
  m.task_density = 0.7;
  m.seed = 11;
  padme::Dataset mt = padme::make_synthetic(m);
  std::string assays;
  const char* names[] = {"ASSAY_A1", "ASSAY_A2", "ASSAY_B", "ASSAY_C", "ASSAY_D"};
  const std::size_t task_of[] = {0, 0, 1, 2, 3};
  for (std::size_t i = 0; i < 5; ++i) assays += std::string(names[i]) + "\t" + std::to_string(task_of[i]) + "\n";
  padme::io::write_text(dir / "multitask" / "assays.tsv", assays);
  std::string rows = "smiles,protein_id,task_id,value\n";
  for (std::size_t i = 0; i < mt.records.size(); ++i) {
    const auto& r = mt.records[i];
    const char* assay = r.task == 0 ? names[i % 2] : names[r.task + 1];
    const std::string value = (i % 5 == 0) ? "1000000" : padme::io::format_double(r.raw);
    rows += mt.compounds[r.compound] + "," + mt.proteins[r.protein].id + "," + assay + "," + value + "\n";
  }
  padme::io::write_text(dir / "multitask" / "interactions.csv", rows);
  padme::write_sequence_file(dir / "multitask" / "sequences.tsv", mt.proteins);
  std::printf("%zu records, %zu multitask records\n", ds.records.size(), mt.records.size());
  return 0;
}
