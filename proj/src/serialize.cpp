#include "tengraph/serialize.hpp"

#include <array>
#include <bit>
#include <fstream>
#include <sstream>

namespace tengraph::io {

namespace {

void put_u64(std::ostream& os, std::uint64_t v) {
    std::array<char, 8> b{};
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    os.write(b.data(), 8);
}

std::uint64_t get_u64(std::istream& is) {
    std::array<unsigned char, 8> b{};
    is.read(reinterpret_cast<char*>(b.data()), 8);
    if (!is) throw DataError("tensor record truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

// -1 for the generic record whose rank is stored explicitly.
int fixed_rank(std::string_view magic) {
    if (magic == kSpatialGraph || magic == kTemporalGraph || magic == kSpatialKernel ||
        magic == kTemporalKernel)
        return 3;
    if (magic == kLiftedGraph) return 4;
    if (magic == kGeneric) return -1;
    throw DataError("unknown tensor magic '" + std::string(magic) + "'");
}

bool has_layout_tag(std::string_view magic) {
    return magic == kSpatialKernel || magic == kTemporalKernel;
}

}  // namespace

void write_record(std::ostream& os, const TensorRecord& rec) {
    if (rec.magic.size() != 4) throw DataError("tensor magic must be 4 bytes");
    const int rank = fixed_rank(rec.magic);
    if (rank >= 0 && static_cast<std::size_t>(rank) != rec.tensor.rank()) {
        throw ShapeError("record '" + rec.magic + "' requires rank " + std::to_string(rank) + ", got " +
                         std::to_string(rec.tensor.rank()));
    }
    os.write(rec.magic.data(), 4);
    if (has_layout_tag(rec.magic)) os.put(static_cast<char>(rec.layout));
    if (rank < 0) put_u64(os, rec.tensor.rank());
    for (auto e : rec.tensor.shape()) put_u64(os, e);
    for (double v : rec.tensor.data()) put_u64(os, std::bit_cast<std::uint64_t>(v));
}

TensorRecord read_record(std::istream& is) {
    TensorRecord rec;
    rec.magic.resize(4);
    is.read(rec.magic.data(), 4);
    if (!is) throw DataError("tensor record truncated (magic)");
    int rank = fixed_rank(rec.magic);
    if (has_layout_tag(rec.magic)) {
        const int tag = is.get();
        if (!is) throw DataError("tensor record truncated (layout tag)");
        rec.layout = static_cast<std::uint8_t>(tag);
    }
    if (rank < 0) {
        const auto r = get_u64(is);
        if (r == 0 || r > 16) throw DataError("implausible tensor rank " + std::to_string(r));
        rank = static_cast<int>(r);
    }
    Shape shape(rank);
    std::uint64_t total = 1;
    for (auto& e : shape) {
        e = get_u64(is);
        if (e == 0 || e > (1ull << 32)) throw DataError("implausible tensor extent " + std::to_string(e));
        total *= e;
        if (total > (1ull << 34)) throw DataError("tensor record too large");
    }
    std::vector<double> values(total);
    for (auto& v : values) v = std::bit_cast<double>(get_u64(is));
    rec.tensor = DenseTensor(std::move(shape), std::move(values));
    return rec;
}

void write_tensor_file(const std::filesystem::path& path, const TensorRecord& rec) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot open '" + path.string() + "' for writing");
    write_record(os, rec);
    if (!os) throw DataError("write failed for '" + path.string() + "'");
}

TensorRecord read_tensor_file(const std::filesystem::path& path, std::string_view expected) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open '" + path.string() + "'");
    TensorRecord rec;
    try {
        rec = read_record(is);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    if (!expected.empty() && rec.magic != expected) {
        throw DataError(path.string() + ": expected magic '" + std::string(expected) + "', found '" +
                        rec.magic + "'");
    }
    return rec;
}

void Container::add(std::string name, TensorRecord rec) {
    for (auto& [n, r] : entries_) {
        if (n == name) {
            r = std::move(rec);
            return;
        }
    }
    entries_.emplace_back(std::move(name), std::move(rec));
}

bool Container::contains(std::string_view name) const {
    for (const auto& e : entries_)
        if (e.first == name) return true;
    return false;
}

const TensorRecord& Container::get(std::string_view name) const {
    for (const auto& e : entries_)
        if (e.first == name) return e.second;
    throw DataError("container has no entry '" + std::string(name) + "'");
}

void write_container(const std::filesystem::path& path, const Container& c) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot open '" + path.string() + "' for writing");
    os.write(kContainer.data(), 4);
    put_u64(os, c.entries().size());
    for (const auto& [name, rec] : c.entries()) {
        put_u64(os, name.size());
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_record(os, rec);
    }
    if (!os) throw DataError("write failed for '" + path.string() + "'");
}

Container read_container(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open '" + path.string() + "'");
    try {
        std::string magic(4, '\0');
        is.read(magic.data(), 4);
        if (!is || magic != kContainer) throw DataError("not a tensor container");
        const auto count = get_u64(is);
        if (count > 100000) throw DataError("implausible entry count");
        Container c;
        for (std::uint64_t i = 0; i < count; ++i) {
            const auto len = get_u64(is);
            if (len > 4096) throw DataError("implausible entry name length");
            std::string name(len, '\0');
            is.read(name.data(), static_cast<std::streamsize>(len));
            if (!is) throw DataError("entry name truncated");
            c.add(std::move(name), read_record(is));
        }
        return c;
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot open '" + path.string() + "' for writing");
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace tengraph::io
