#pragma once
// Small file and formatting helpers shared by the artifact writers.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace qdc {

// printf-style doubles with fixed formats so artifacts are byte-stable
std::string fmt_g17(double v);
std::string fmt_g10(double v);
std::string fmt_g6(double v);

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

std::string read_file(const std::filesystem::path& path);

// write-temp-then-rename; creates parent directories
void atomic_write_file(const std::filesystem::path& path,
                       const std::string& content);

}  // namespace qdc
