#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tengraph/tensor.hpp"

namespace tengraph::io {

// Binary tensor records: 4-byte ASCII magic, [1-byte layout tag for kernel
// records], little-endian u64 extents, then row-major little-endian f64 data.
// Fixed-rank magics carry no rank field; the generic record stores one.
inline constexpr std::string_view kSpatialGraph = "STG1";   // rank 3, N x N x T
inline constexpr std::string_view kTemporalGraph = "TTG1";  // rank 3, T x T x N
inline constexpr std::string_view kLiftedGraph = "LG41";    // rank 4, n x n x K x S
inline constexpr std::string_view kSpatialKernel = "WA31";  // rank 3 + layout tag
inline constexpr std::string_view kTemporalKernel = "WB31"; // rank 3 + layout tag
inline constexpr std::string_view kGeneric = "DTN1";        // u64 rank, then extents
inline constexpr std::string_view kContainer = "TCN1";

/// Layout tag stored with kernel records: (k, c) merged with k slowest.
inline constexpr std::uint8_t kLayoutKMajor = 1;

struct TensorRecord {
    std::string magic;
    std::uint8_t layout = 0;
    DenseTensor tensor;
};

void write_record(std::ostream& os, const TensorRecord& rec);
TensorRecord read_record(std::istream& is);

void write_tensor_file(const std::filesystem::path& path, const TensorRecord& rec);
/// Reads a single record and checks its magic when `expected` is non-empty.
TensorRecord read_tensor_file(const std::filesystem::path& path, std::string_view expected = {});

/// Named sequence of records, written as: magic, u64 count, then per entry
/// u64 name length, name bytes, record.
class Container {
public:
    void add(std::string name, TensorRecord rec);
    bool contains(std::string_view name) const;
    const TensorRecord& get(std::string_view name) const;
    const std::vector<std::pair<std::string, TensorRecord>>& entries() const { return entries_; }

private:
    std::vector<std::pair<std::string, TensorRecord>> entries_;
};

void write_container(const std::filesystem::path& path, const Container& c);
Container read_container(const std::filesystem::path& path);

/// Writes `text` to `path` verbatim (binary mode, no newline translation).
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace tengraph::io
