#include "ntf/config.hpp"

#include "ntf/errors.hpp"

namespace ntf {

void validate_fit_config(const FitConfig& cfg) {
    if (!(cfg.beta >= 0.0 && cfg.beta < 2.0)) throw DomainError("beta must lie in [0, 2)");
    if (!(cfg.eps > 0.0)) throw DomainError("eps must be positive");
    if (cfg.inner_steps < 1) throw DomainError("inner_steps must be >= 1");
    if (cfg.rank < 1) throw DomainError("rank must be >= 1");
    for (std::size_t j : cfg.ranks)
        if (j < 1) throw DomainError("every core rank must be >= 1");
    if (cfg.data_floor && !(*cfg.data_floor > 0.0))
        throw DomainError("data_floor must be positive");
    if (!(cfg.extrap_cap >= 0.0) || !(cfg.extrap_delta > 0.0))
        throw DomainError("invalid extrapolation constants");
}

}  // namespace ntf
