#include "padme/protein.hpp"

#include <fstream>

#include "padme/error.hpp"
#include "padme/io.hpp"

namespace padme {

ProteinDescriptor::ProteinDescriptor(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() != kPscWidth)
    throw FormatError("protein descriptor must have " + std::to_string(kPscWidth) + " entries");
}

int residue_index(char c) {
  const auto pos = kAminoAcids.find(c);
  return pos == std::string_view::npos ? -1 : static_cast<int>(pos);
}

ProteinDescriptor psc(std::string_view sequence, bool phosphorylated) {
  const std::size_t len = sequence.size();
  if (len < 3)
    throw DataError("protein sequence must have at least 3 residues (got " + std::to_string(len) + ")");
  std::vector<int> idx(len);
  for (std::size_t i = 0; i < len; ++i) {
    idx[i] = residue_index(sequence[i]);
    if (idx[i] < 0)
      throw DataError(std::string("unknown residue '") + sequence[i] + "' at position " + std::to_string(i + 1));
  }
  ProteinDescriptor d;
  auto& v = d.values_;
  const double inv1 = 1.0 / static_cast<double>(len);
  const double inv2 = 1.0 / static_cast<double>(len - 1);
  const double inv3 = 1.0 / static_cast<double>(len - 2);
  // Accumulate counts, then scale, so each block sums to exactly count/len.
  for (std::size_t i = 0; i < len; ++i) v[idx[i]] += 1.0;
  for (std::size_t i = 0; i + 1 < len; ++i) v[kAacWidth + idx[i] * 20 + idx[i + 1]] += 1.0;
  for (std::size_t i = 0; i + 2 < len; ++i)
    v[kAacWidth + kDcWidth + idx[i] * 400 + idx[i + 1] * 20 + idx[i + 2]] += 1.0;
  for (std::size_t i = 0; i < kAacWidth; ++i) v[i] *= inv1;
  for (std::size_t i = kAacWidth; i < kAacWidth + kDcWidth; ++i) v[i] *= inv2;
  for (std::size_t i = kAacWidth + kDcWidth; i < kPscWidth - 1; ++i) v[i] *= inv3;
  v.back() = phosphorylated ? 1.0 : 0.0;
  return d;
}

std::vector<ProteinEntry> read_sequence_file(const std::filesystem::path& path) {
  std::vector<ProteinEntry> out;
  const auto lines = io::read_lines(path);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto line = io::trim(lines[n]);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = io::split(line, '\t');
    if (fields.size() != 2 && fields.size() != 3)
      throw DataError(path.string() + ":" + std::to_string(n + 1) + ": expected 2 or 3 tab-separated fields");
    ProteinEntry e;
    e.id = std::string(io::trim(fields[0]));
    if (fields.size() == 3) {
      const auto flag = io::trim(fields[1]);
      if (flag == "1")
        e.phosphorylated = true;
      else if (flag != "0")
        throw DataError(path.string() + ":" + std::to_string(n + 1) + ": phospho flag must be 0 or 1");
    }
    e.sequence = std::string(io::trim(fields.back()));
    if (e.id.empty()) throw DataError(path.string() + ":" + std::to_string(n + 1) + ": empty protein id");
    out.push_back(std::move(e));
  }
  return out;
}

void write_sequence_file(const std::filesystem::path& path, std::span<const ProteinEntry> entries) {
  std::string text;
  for (const auto& e : entries) text += e.id + "\t" + (e.phosphorylated ? "1" : "0") + "\t" + e.sequence + "\n";
  io::write_text(path, text);
}

namespace {
constexpr std::string_view kPscMagic = "PSCD";
constexpr std::uint32_t kPscFileVersion = 1;
}  // namespace

void write_descriptor_table(const std::filesystem::path& path, const DescriptorTable& table) {
  io::BinaryWriter w;
  w.raw(kPscMagic);
  w.u32(kPscFileVersion);
  w.u32(static_cast<std::uint32_t>(kPscWidth));
  w.u32(static_cast<std::uint32_t>(table.ids.size()));
  for (std::size_t i = 0; i < table.ids.size(); ++i) {
    w.str(table.ids[i]);
    for (double v : table.descriptors[i].values()) w.f64(v);
  }
  io::write_bytes(path, w.bytes());
}

DescriptorTable read_descriptor_table(const std::filesystem::path& path) {
  const auto bytes = io::read_bytes(path);
  io::BinaryReader r(bytes);
  if (r.raw(4) != kPscMagic) throw FormatError(path.string() + ": not a descriptor table");
  if (r.u32() != kPscFileVersion) throw FormatError(path.string() + ": unsupported descriptor table version");
  if (r.u32() != kPscWidth) throw FormatError(path.string() + ": descriptor width mismatch");
  DescriptorTable t;
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    t.ids.push_back(r.str());
    std::vector<double> v(kPscWidth);
    for (double& x : v) x = r.f64();
    t.descriptors.emplace_back(std::move(v));
  }
  if (!r.at_end()) throw FormatError(path.string() + ": trailing bytes in descriptor table");
  return t;
}

}  // namespace padme
