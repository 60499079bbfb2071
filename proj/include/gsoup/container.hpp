#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace gsoup {

// Single-file container used by checkpoints and partition files: an 8-byte
// little-endian header length, the JSON header bytes, then the raw payload.
// Writing is deterministic (nlohmann serializes with sorted keys).

inline void write_container(const std::filesystem::path& path, const nlohmann::json& header,
                            const void* payload, std::size_t payload_bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  const std::string head = header.dump();
  const std::uint64_t len = head.size();
  char len_bytes[8];
  for (int i = 0; i < 8; ++i) len_bytes[i] = static_cast<char>((len >> (8 * i)) & 0xff);
  out.write(len_bytes, 8);
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  if (payload_bytes > 0)
    out.write(static_cast<const char*>(payload), static_cast<std::streamsize>(payload_bytes));
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

struct ContainerData {
  nlohmann::json header;
  std::vector<char> payload;
};

inline ContainerData read_container(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path.string() + ": missing " + what + " file");
  char len_bytes[8];
  if (!in.read(len_bytes, 8))
    throw std::runtime_error(path.string() + ": corrupt " + what + " file (short header)");
  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i)
    len |= static_cast<std::uint64_t>(static_cast<unsigned char>(len_bytes[i])) << (8 * i);
  if (len > (1ull << 30))
    throw std::runtime_error(path.string() + ": corrupt " + what + " file (header length)");
  std::string head(len, '\0');
  if (!in.read(head.data(), static_cast<std::streamsize>(len)))
    throw std::runtime_error(path.string() + ": corrupt " + what + " file (truncated header)");
  ContainerData data;
  try {
    data.header = nlohmann::json::parse(head);
  } catch (const nlohmann::json::exception&) {
    throw std::runtime_error(path.string() + ": corrupt " + what + " file (header JSON)");
  }
  data.payload.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  return data;
}

}  // namespace gsoup
