#include "dicke/cache.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iostream>
#include <random>
#include <vector>

namespace dicke {

namespace {

constexpr char kMagic[4] = {'D', 'K', 'E', 'C'};
constexpr std::uint32_t kVersion = 1;
constexpr const char* kCodeVersion = "dickesim-cache-v1";

static_assert(sizeof(double) == 8);

std::uint64_t fnv1a(std::uint64_t hash, const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t k = 0; k < len; ++k) {
        hash ^= bytes[k];
        hash *= 0x100000001b3ull;
    }
    return hash;
}

std::uint64_t fnv1a_u64(std::uint64_t hash, std::uint64_t v) {
    return fnv1a(hash, &v, sizeof v);
}

std::uint64_t bswap64(std::uint64_t v) {
    std::uint64_t r = 0;
    for (int k = 0; k < 8; ++k) {
        r = (r << 8) | (v & 0xff);
        v >>= 8;
    }
    return r;
}

std::uint64_t to_le(std::uint64_t v) {
    return std::endian::native == std::endian::little ? v : bswap64(v);
}
std::uint64_t from_le(std::uint64_t v) { return to_le(v); }

std::uint32_t to_le32(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::little) return v;
    return (v >> 24) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) | (v << 24);
}

void write_doubles_le(std::ofstream& out, const double* data, std::size_t count) {
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * 8));
        return;
    }
    std::vector<std::uint64_t> buf(count);
    for (std::size_t k = 0; k < count; ++k) {
        buf[k] = to_le(std::bit_cast<std::uint64_t>(data[k]));
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(count * 8));
}

bool read_doubles_le(std::ifstream& in, double* data, std::size_t count) {
    if (!in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * 8))) {
        return false;
    }
    if constexpr (std::endian::native != std::endian::little) {
        for (std::size_t k = 0; k < count; ++k) {
            data[k] = std::bit_cast<double>(from_le(std::bit_cast<std::uint64_t>(data[k])));
        }
    }
    return true;
}

} // namespace

std::uint64_t model_fingerprint(const ModelParams& params, Parity sector) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    hash = fnv1a(hash, kCodeVersion, std::strlen(kCodeVersion));
    const std::uint64_t tag =
        (params.variant == Variant::Full ? 1u : 2u) | (sector == Parity::Odd ? 0x10u : 0x20u);
    hash = fnv1a_u64(hash, tag);
    hash = fnv1a_u64(hash, std::bit_cast<std::uint64_t>(params.omega));
    hash = fnv1a_u64(hash, std::bit_cast<std::uint64_t>(params.omega0));
    hash = fnv1a_u64(hash, std::bit_cast<std::uint64_t>(params.lambda));
    hash = fnv1a_u64(hash, std::bit_cast<std::uint64_t>(params.j));
    hash = fnv1a_u64(hash, static_cast<std::uint64_t>(params.n_max));
    return hash;
}

void write_decomposition_file(const std::filesystem::path& path,
                              const EigenDecomposition& decomp) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot open cache file for writing: " + tmp.string());
        out.write(kMagic, 4);
        const std::uint32_t version = to_le32(kVersion);
        out.write(reinterpret_cast<const char*>(&version), 4);
        const std::uint64_t fp = to_le(decomp.fingerprint);
        out.write(reinterpret_cast<const char*>(&fp), 8);
        const std::uint64_t dim = to_le(static_cast<std::uint64_t>(decomp.dim()));
        out.write(reinterpret_cast<const char*>(&dim), 8);
        write_doubles_le(out, decomp.energies.data(), static_cast<std::size_t>(decomp.dim()));
        write_doubles_le(out, decomp.vectors.data(),
                         static_cast<std::size_t>(decomp.dim()) * decomp.dim());
        if (!out) throw ConfigError("cache write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::optional<EigenDecomposition> read_decomposition_file(const std::filesystem::path& path,
                                                          std::uint64_t expected_fingerprint) {
    std::error_code ec;
    const auto size = std::filesystem::file_size(path, ec);
    if (ec) return std::nullopt;

    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;

    char magic[4];
    std::uint32_t version = 0;
    std::uint64_t fp = 0, dim_raw = 0;
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) return std::nullopt;
    if (!in.read(reinterpret_cast<char*>(&version), 4) || to_le32(version) != kVersion) {
        return std::nullopt;
    }
    if (!in.read(reinterpret_cast<char*>(&fp), 8)) return std::nullopt;
    if (from_le(fp) != expected_fingerprint) return std::nullopt;
    if (!in.read(reinterpret_cast<char*>(&dim_raw), 8)) return std::nullopt;
    const std::uint64_t dim = from_le(dim_raw);
    if (dim == 0 || dim > (1ull << 20)) return std::nullopt;

    const std::uint64_t expect_size = 24 + 8 * (dim + dim * dim);
    if (size != expect_size) return std::nullopt;  // truncated or padded payload

    EigenDecomposition d;
    d.fingerprint = expected_fingerprint;
    d.energies.resize(static_cast<Eigen::Index>(dim));
    d.vectors.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    if (!read_doubles_le(in, d.energies.data(), dim)) return std::nullopt;
    if (!read_doubles_le(in, d.vectors.data(), dim * dim)) return std::nullopt;

    // orthonormality spot check on deterministic vector pairs
    std::mt19937_64 rng(expected_fingerprint);
    std::uniform_int_distribution<Eigen::Index> pick(0, static_cast<Eigen::Index>(dim) - 1);
    for (int k = 0; k < 5; ++k) {
        const Eigen::Index a = pick(rng);
        const Eigen::Index b = pick(rng);
        const double dot = d.vectors.col(a).dot(d.vectors.col(b));
        const double expect = a == b ? 1.0 : 0.0;
        if (std::abs(dot - expect) > 1e-9) return std::nullopt;
    }
    return d;
}

EigenCache::EigenCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
}

std::filesystem::path EigenCache::file_for(std::uint64_t fingerprint) const {
    char name[32];
    std::snprintf(name, sizeof name, "dkec-%016llx.bin",
                  static_cast<unsigned long long>(fingerprint));
    return dir_ / name;
}

std::shared_ptr<const EigenDecomposition> EigenCache::get_or_compute(const ModelParams& params,
                                                                     Parity sector) {
    const std::uint64_t key = model_fingerprint(params, sector);
    {
        std::lock_guard lock(mutex_);
        if (auto it = memo_.find(key); it != memo_.end()) {
            if (auto live = it->second.lock()) {
                ++memo_hits_;
                return live;
            }
        }
    }

    if (!dir_.empty()) {
        const auto path = file_for(key);
        if (std::filesystem::exists(path)) {
            if (auto loaded = read_decomposition_file(path, key)) {
                auto shared = std::make_shared<const EigenDecomposition>(std::move(*loaded));
                std::lock_guard lock(mutex_);
                memo_[key] = shared;
                ++disk_hits_;
                return shared;
            }
            std::cerr << "warning: cache file " << path.string()
                      << " is corrupt or stale; recomputing\n";
        }
    }

    const Basis basis = Basis::sector(params.j, params.n_max, sector);
    EigenDecomposition d = diagonalize(build_hamiltonian(params, basis));
    d.fingerprint = key;
    auto shared = std::make_shared<const EigenDecomposition>(std::move(d));

    std::lock_guard lock(mutex_);
    if (!dir_.empty()) write_decomposition_file(file_for(key), *shared);
    memo_[key] = shared;
    ++computed_;
    return shared;
}

std::shared_ptr<const Eigen::VectorXd> EigenCache::energies_only(const ModelParams& params,
                                                                 Parity sector) {
    const std::uint64_t key = model_fingerprint(params, sector);
    {
        std::lock_guard lock(mutex_);
        if (auto it = energy_memo_.find(key); it != energy_memo_.end()) return it->second;
        if (auto it = memo_.find(key); it != memo_.end()) {
            if (auto live = it->second.lock()) {
                return std::make_shared<const Eigen::VectorXd>(live->energies);
            }
        }
    }
    std::shared_ptr<const Eigen::VectorXd> energies;
    if (!dir_.empty()) {
        if (auto loaded = read_decomposition_file(file_for(key), key)) {
            energies = std::make_shared<const Eigen::VectorXd>(std::move(loaded->energies));
        }
    }
    if (!energies) {
        const Basis basis = Basis::sector(params.j, params.n_max, sector);
        energies = std::make_shared<const Eigen::VectorXd>(
            symmetric_eigenvalues(build_hamiltonian(params, basis)));
    }
    std::lock_guard lock(mutex_);
    energy_memo_[key] = energies;
    return energies;
}

DecompositionProvider EigenCache::provider(Parity sector) {
    return [this, sector](const ModelParams& params) { return get_or_compute(params, sector); };
}

} // namespace dicke
