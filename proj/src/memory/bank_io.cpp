#include "clipfusion/memory/bank_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "clipfusion/error.hpp"

namespace clipfusion {

namespace {

constexpr char kMagic[8] = {'C', 'F', 'B', 'A', 'N', 'K', '0', '1'};

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64(const std::string& in, std::size_t pos) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  return v;
}

}  // namespace

void save_bank(const std::filesystem::path& path, const ReferenceBank& bank) {
  nlohmann::json header;
  header["category"] = bank.category();
  header["shots"] = bank.shots();
  header["seed"] = bank.seed();
  header["tags"] = nlohmann::json::array();
  for (const auto& tag : bank.tags()) {
    const auto& e = bank.entry(tag);
    header["tags"].push_back(
        {{"tag", tag.to_string()}, {"dim", e.dim}, {"count", e.count()}, {"cells_per_image", e.cells_per_image}});
  }
  const std::string text = header.dump();

  std::string bytes(kMagic, sizeof(kMagic));
  put_u64(bytes, text.size());
  bytes += text;
  for (const auto& tag : bank.tags()) {
    for (float v : bank.entry(tag).vectors) {
      const auto bits = std::bit_cast<std::uint32_t>(v);
      for (int s = 0; s < 32; s += 8) bytes.push_back(static_cast<char>((bits >> s) & 0xFF));
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot write bank '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IngestionError("failed writing bank '" + path.string() + "'");
}

ReferenceBank load_bank(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("reference bank not found: '" + path.string() + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("'" + path.string() + "' is not a reference bank file");
  }
  const std::uint64_t header_len = get_u64(bytes, 8);
  if (16 + header_len > bytes.size()) throw FormatError("truncated bank header in '" + path.string() + "'");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(16, header_len));
    ReferenceBank bank(header.at("category").get<std::string>(), header.at("shots").get<int>(),
                       header.at("seed").get<std::uint64_t>());
    std::size_t pos = 16 + header_len;
    for (const auto& t : header.at("tags")) {
      const int dim = t.at("dim").get<int>();
      const std::size_t count = t.at("count").get<std::size_t>();
      const std::size_t n = count * static_cast<std::size_t>(dim);
      if (pos + n * 4 > bytes.size()) throw FormatError("truncated vector block in '" + path.string() + "'");
      std::vector<float> vectors(n);
      for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) {
          bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + i * 4 + b])) << (8 * b);
        }
        vectors[i] = std::bit_cast<float>(bits);
      }
      pos += n * 4;
      bank.add_vectors(SourceTag::parse(t.at("tag").get<std::string>()), dim,
                       t.at("cells_per_image").get<std::size_t>(), std::move(vectors));
    }
    if (pos != bytes.size()) throw FormatError("trailing bytes in bank '" + path.string() + "'");
    return bank;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad bank header in '" + path.string() + "': " + e.what());
  }
}

}  // namespace clipfusion
