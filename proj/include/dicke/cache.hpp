// cache.hpp — persistent eigendecomposition cache (DKEC files)
//
// File layout, all integers and floats little-endian:
//   bytes 0-3   magic "DKEC"
//   bytes 4-7   format version (u32, currently 1)
//   bytes 8-15  key fingerprint (u64)
//   bytes 16-23 dimension d (u64)
//   then d f64 energies, then d*d f64 eigenvectors column-major.
// Round trips are bit-exact; any size/magic/fingerprint mismatch reads as a
// miss so the entry is recomputed and overwritten.

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>

#include "dicke/hamiltonian.hpp"
#include "dicke/ldos.hpp"
#include "dicke/spectral.hpp"

namespace dicke {

// Stable key of (variant, ω, ω₀, λ, j, n_max, sector) plus the cache code
// version; doubles hash by bit pattern so distinct configs never collide by
// formatting.
std::uint64_t model_fingerprint(const ModelParams& params, Parity sector);

void write_decomposition_file(const std::filesystem::path& path, const EigenDecomposition& decomp);

// Reads and validates one cache file.  Returns nullopt on missing file,
// wrong magic/version/fingerprint/size, or a failed orthonormality spot
// check (5 deterministic vector pairs within 1e-9).
std::optional<EigenDecomposition> read_decomposition_file(const std::filesystem::path& path,
                                                          std::uint64_t expected_fingerprint);

// Memoizing decomposition store.  An empty directory path keeps entries in
// memory only (weak references); with a directory, entries persist across
// processes.  Thread-safe: lookups and writes are serialized, computes run
// unlocked.
class EigenCache {
public:
    explicit EigenCache(std::filesystem::path dir = {});

    std::shared_ptr<const EigenDecomposition> get_or_compute(const ModelParams& params,
                                                             Parity sector);

    // Eigenvalue-only spectra for truncation probes (memory memo, no disk).
    std::shared_ptr<const Eigen::VectorXd> energies_only(const ModelParams& params, Parity sector);

    DecompositionProvider provider(Parity sector);

    const std::filesystem::path& directory() const { return dir_; }
    int computed() const { return computed_; }
    int disk_hits() const { return disk_hits_; }
    int memo_hits() const { return memo_hits_; }

private:
    std::filesystem::path file_for(std::uint64_t fingerprint) const;

    std::filesystem::path dir_;
    std::mutex mutex_;
    std::unordered_map<std::uint64_t, std::weak_ptr<const EigenDecomposition>> memo_;
    std::unordered_map<std::uint64_t, std::shared_ptr<const Eigen::VectorXd>> energy_memo_;
    int computed_ = 0;
    int disk_hits_ = 0;
    int memo_hits_ = 0;
};

} // namespace dicke
