#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ntf/config.hpp"
#include "ntf/cp.hpp"
#include "ntf/tensor.hpp"
#include "ntf/tucker.hpp"

namespace ntf {

/// Dense tensors above this entry count are refused on ingestion.
inline constexpr std::size_t kDefaultEntryBudget = std::size_t{1} << 27;

/// Binary tensor format "CTF1": 4 magic bytes `CTF1`, one unsigned byte N,
/// N little-endian u64 dimensions, then the row-major values as little-endian
/// IEEE-754 doubles. Round trips are bit-exact.
void write_tensor(const std::string& path, const DenseTensor& t);
DenseTensor read_tensor(const std::string& path, std::size_t max_entries = kDefaultEntryBudget);

/// Sparse coordinate text format. First nonblank line: `dims: I1 I2 ... IN`;
/// each following nonblank line: `i1 i2 ... iN value` with zero-based
/// indices. Duplicate coordinates accumulate by addition; unlisted entries
/// are zero. If `floor` is given, X <- max(X, floor) afterwards.
DenseTensor read_coo(const std::string& path, std::optional<double> floor = std::nullopt,
                     std::size_t max_entries = kDefaultEntryBudget);

/// Loads either format, sniffing the CTF1 magic bytes first and falling back
/// to the coordinate text parser.
DenseTensor read_tensor_auto(const std::string& path,
                             std::size_t max_entries = kDefaultEntryBudget);

/// Trace CSV: header `iter,time_s,loss`, one row per record, values printed
/// with 17 significant digits so parsing them back is exact.
void write_trace(const std::string& path, std::span<const TraceRecord> records);
std::vector<TraceRecord> read_trace(const std::string& path);

/// Deterministic uniform generator. The stream tag keeps draws for different
/// purposes (synthetic ground truth, fit initialization, test data)
/// independent even under the same seed.
class Rng {
public:
    static constexpr std::uint64_t kSynthStream = 1;
    static constexpr std::uint64_t kInitStream = 2;
    static constexpr std::uint64_t kDataStream = 3;

    Rng(std::uint64_t seed, std::uint64_t stream);

    /// Uniform in [0, 1) with 53 random bits; independent of platform word
    /// size.
    double uniform01();

private:
    std::mt19937_64 engine_;
};

/// Factors/core with entries uniform in (0,1), clamped to >= eps.
CpFactors random_cp_factors(std::span<const std::size_t> dims, std::size_t rank, Rng& rng,
                            double eps);
TuckerModel random_tucker_model(std::span<const std::size_t> dims,
                                std::span<const std::size_t> ranks, Rng& rng, double eps);

/// Seeded fit initializations (init stream).
CpFactors init_cp_factors(std::span<const std::size_t> dims, std::size_t rank, std::uint64_t seed,
                          double eps);
TuckerModel init_tucker_model(std::span<const std::size_t> dims,
                              std::span<const std::size_t> ranks, std::uint64_t seed, double eps);

/// Noiseless synthetic problems (synth stream): ground-truth parameters are
/// drawn uniformly and the data tensor is their exact reconstruction.
std::pair<DenseTensor, CpFactors> synth_cp(std::span<const std::size_t> dims, std::size_t rank,
                                           std::uint64_t seed, double eps = 1e-12);
std::pair<DenseTensor, TuckerModel> synth_tucker(std::span<const std::size_t> dims,
                                                 std::span<const std::size_t> ranks,
                                                 std::uint64_t seed, double eps = 1e-12);

}  // namespace ntf
