#include "entanglekit/tensor_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace entanglekit {

namespace {

constexpr char kMagic[4] = {'L', 'C', 'T', 'N'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "tensor container I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& os, T value) {
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    T value{};
    is.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!is)
        throw parse_error("truncated tensor container");
    return value;
}

} // namespace

void write_tensor(std::ostream& os, const DenseTensor& a) {
    os.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(os, kVersion);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(a.ndim()));
    for (std::size_t d : a.dims())
        put<std::uint64_t>(os, static_cast<std::uint64_t>(d));
    os.write(reinterpret_cast<const char*>(a.data()),
             static_cast<std::streamsize>(a.size() * sizeof(double)));
    if (!os)
        throw error("tensor write failed");
}

DenseTensor read_tensor(std::istream& is, std::size_t budget) {
    char magic[4];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw parse_error("bad tensor container magic");
    const auto version = get<std::uint32_t>(is);
    if (version != kVersion)
        throw parse_error("unsupported tensor container version " + std::to_string(version));
    const auto ndim = get<std::uint32_t>(is);
    if (ndim == 0)
        throw parse_error("tensor container has zero axes");
    std::vector<std::size_t> dims(ndim);
    std::size_t total = 1;
    for (auto& d : dims) {
        d = static_cast<std::size_t>(get<std::uint64_t>(is));
        if (d == 0)
            throw parse_error("tensor container has a zero extent");
        if (total > budget / d)
            throw capacity_error("tensor container exceeds the element budget");
        total *= d;
    }
    std::vector<double> data(total);
    is.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(total * sizeof(double)));
    if (!is)
        throw parse_error("truncated tensor container payload");
    return DenseTensor(std::move(dims), std::move(data));
}

void save_tensor(const std::string& path, const DenseTensor& a) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw error("cannot open '" + path + "' for writing");
    write_tensor(os, a);
}

DenseTensor load_tensor(const std::string& path, std::size_t budget) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw error("cannot open '" + path + "' for reading");
    return read_tensor(is, budget);
}

} // namespace entanglekit
