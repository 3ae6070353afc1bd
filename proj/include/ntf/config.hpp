#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace ntf {

enum class ModelKind { cp, tucker };
enum class Algo { bcomm, jcomm, mu_unfold };

/// One benchmark row: outer-iteration index, cumulative solver seconds
/// (monotonic clock, loss evaluation and I/O excluded), and the normalized
/// loss after that iteration. Iteration 0 records the initial loss. For the
/// multiplicative solvers the loss column is nonincreasing up to a 1e-12
/// relative slack per step.
struct TraceRecord {
    std::size_t iter = 0;
    double time_s = 0.0;
    double loss = 0.0;
};

struct FitConfig {
    ModelKind model = ModelKind::cp;
    Algo algo = Algo::bcomm;
    double beta = 1.0;
    std::size_t rank = 1;              // CP rank
    std::vector<std::size_t> ranks;    // Tucker core shape
    double eps = 1e-12;                // parameter floor / power safeguard
    std::size_t inner_steps = 3;       // joint-MM sweeps per outer iteration
    std::size_t max_iters = 500;
    double tol = 0.0;                  // stop when |d loss| / (1 + loss) < tol; 0 runs to max_iters
    std::uint64_t seed = 0;
    bool extrapolate = false;
    double extrap_cap = 1.0;           // displacement cap constant; 0 forces the inertial step off
    double extrap_delta = 1e-6;
    std::optional<double> data_floor;  // entrywise floor applied to the data before fitting
};

/// Throws DomainError on invariant violations (beta outside [0,2), eps <= 0,
/// inner_steps < 1, rank < 1).
void validate_fit_config(const FitConfig& cfg);

}  // namespace ntf
