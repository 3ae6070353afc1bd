// Command-line front end: data synthesis, fitting, and benchmarking for
// nonnegative CP/Tucker decompositions under the beta-divergence.
//
// Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 format error.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ntf/config.hpp"
#include "ntf/cp.hpp"
#include "ntf/divergence.hpp"
#include "ntf/errors.hpp"
#include "ntf/io.hpp"
#include "ntf/tucker.hpp"
#include "ntf/unfold.hpp"

namespace {

double default_eps() {
    if (const char* env = std::getenv("NTF_EPS")) {
        char* end = nullptr;
        const double v = std::strtod(env, &end);
        if (end != env && v > 0.0) return v;
    }
    return 1e-12;
}

void require_usage(bool ok, const std::string& msg) {
    if (!ok) throw ntf::DomainError(msg);
}

ntf::Algo parse_algo(const std::string& s) {
    if (s == "bcomm") return ntf::Algo::bcomm;
    if (s == "jcomm") return ntf::Algo::jcomm;
    if (s == "mu-unfold") return ntf::Algo::mu_unfold;
    throw ntf::DomainError("unknown algorithm: " + s);
}

std::string dims_to_string(const std::vector<std::size_t>& dims) {
    std::string out;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(dims[i]);
    }
    return out;
}

struct SynthArgs {
    std::vector<std::size_t> dims;
    std::size_t rank = 1;
    std::vector<std::size_t> ranks;
    std::uint64_t seed = 0;
    double eps = default_eps();
    std::string out;
    std::string truth_prefix;
};

struct FitArgs {
    std::string input;
    std::string model = "cp";
    std::string algo = "bcomm";
    double beta = 1.0;
    std::size_t rank = 1;
    std::vector<std::size_t> ranks;
    std::size_t inner = 3;
    std::size_t max_iters = 500;
    double tol = 0.0;
    std::uint64_t seed = 0;
    double eps = default_eps();
    bool extrapolate = false;
    double extrap_cap = 1.0;
    std::optional<double> data_floor;
    std::string trace_path;
    std::string out_prefix;
};

struct BenchArgs {
    std::string input;
    std::string model = "cp";
    std::vector<std::string> algos;
    std::vector<std::uint64_t> seeds;
    double beta = 1.0;
    std::size_t rank = 1;
    std::vector<std::size_t> ranks;
    std::size_t inner = 3;
    std::size_t max_iters = 100;
    double eps = default_eps();
    std::string out;
};

void write_cp_model(const std::string& prefix, const ntf::CpFactors& f) {
    for (std::size_t n = 0; n < f.order(); ++n) {
        const ntf::Matrix& m = f.factors[n];
        ntf::write_tensor(prefix + ".factor" + std::to_string(n) + ".ctf",
                          ntf::DenseTensor({m.rows(), m.cols()}, m.values()));
    }
}

void write_tucker_model(const std::string& prefix, const ntf::TuckerModel& m) {
    ntf::write_tensor(prefix + ".core.ctf", m.core);
    for (std::size_t n = 0; n < m.order(); ++n) {
        const ntf::Matrix& a = m.factors[n];
        ntf::write_tensor(prefix + ".factor" + std::to_string(n) + ".ctf",
                          ntf::DenseTensor({a.rows(), a.cols()}, a.values()));
    }
}

int run_synth_cp(const SynthArgs& a) {
    require_usage(!a.dims.empty(), "--dims is required and must be nonempty");
    for (std::size_t d : a.dims) require_usage(d > 0, "--dims entries must be positive");
    require_usage(a.rank >= 1, "--rank must be >= 1");

    auto [x, truth] = ntf::synth_cp(a.dims, a.rank, a.seed, a.eps);
    ntf::write_tensor(a.out, x);
    if (!a.truth_prefix.empty()) write_cp_model(a.truth_prefix, truth);
    const ntf::BetaParam p(1.0);
    std::printf("dims %s seed %llu loss %.17g\n", dims_to_string(a.dims).c_str(),
                static_cast<unsigned long long>(a.seed),
                ntf::D_beta_mean(x, ntf::cp_reconstruct(truth), p));
    return 0;
}

int run_synth_tucker(const SynthArgs& a) {
    require_usage(!a.dims.empty(), "--dims is required and must be nonempty");
    for (std::size_t d : a.dims) require_usage(d > 0, "--dims entries must be positive");
    require_usage(a.ranks.size() == a.dims.size(), "--ranks must match --dims in length");
    for (std::size_t j : a.ranks) require_usage(j > 0, "--ranks entries must be positive");

    auto [x, truth] = ntf::synth_tucker(a.dims, a.ranks, a.seed, a.eps);
    ntf::write_tensor(a.out, x);
    if (!a.truth_prefix.empty()) write_tucker_model(a.truth_prefix, truth);
    const ntf::BetaParam p(1.0);
    std::printf("dims %s seed %llu loss %.17g\n", dims_to_string(a.dims).c_str(),
                static_cast<unsigned long long>(a.seed),
                ntf::D_beta_mean(x, ntf::tucker_reconstruct(truth), p));
    return 0;
}

ntf::FitConfig to_config(const FitArgs& a) {
    ntf::FitConfig cfg;
    cfg.model = a.model == "cp" ? ntf::ModelKind::cp : ntf::ModelKind::tucker;
    cfg.algo = parse_algo(a.algo);
    cfg.beta = a.beta;
    cfg.rank = a.rank;
    cfg.ranks = a.ranks;
    cfg.eps = a.eps;
    cfg.inner_steps = a.inner;
    cfg.max_iters = a.max_iters;
    cfg.tol = a.tol;
    cfg.seed = a.seed;
    cfg.extrapolate = a.extrapolate;
    cfg.extrap_cap = a.extrap_cap;
    cfg.data_floor = a.data_floor;
    ntf::validate_fit_config(cfg);
    return cfg;
}

int run_fit(const FitArgs& a) {
    const ntf::FitConfig cfg = to_config(a);
    ntf::DenseTensor x = ntf::read_tensor_auto(a.input);
    if (cfg.data_floor) x = ntf::cwise_max(x, *cfg.data_floor);

    std::vector<ntf::TraceRecord> trace;
    if (cfg.model == ntf::ModelKind::cp) {
        ntf::CpFactors init = ntf::init_cp_factors(x.shape(), cfg.rank, cfg.seed, cfg.eps);
        ntf::CpFitResult res;
        switch (cfg.algo) {
            case ntf::Algo::bcomm: res = ntf::bcomm_fit(x, std::move(init), cfg); break;
            case ntf::Algo::jcomm: res = ntf::jcomm_fit(x, std::move(init), cfg); break;
            case ntf::Algo::mu_unfold: res = ntf::mu_unfold_cp_fit(x, std::move(init), cfg); break;
        }
        trace = std::move(res.trace);
        if (!a.out_prefix.empty()) write_cp_model(a.out_prefix, res.model);
    } else {
        require_usage(a.ranks.size() == x.order(),
                      "--ranks must provide one core rank per tensor mode");
        ntf::TuckerModel init = ntf::init_tucker_model(x.shape(), cfg.ranks, cfg.seed, cfg.eps);
        ntf::TuckerFitResult res;
        switch (cfg.algo) {
            case ntf::Algo::bcomm: res = ntf::tucker_bcomm_fit(x, std::move(init), cfg); break;
            case ntf::Algo::jcomm: res = ntf::tucker_jcomm_fit(x, std::move(init), cfg); break;
            case ntf::Algo::mu_unfold:
                res = ntf::mu_unfold_tucker_fit(x, std::move(init), cfg);
                break;
        }
        trace = std::move(res.trace);
        if (!a.out_prefix.empty()) write_tucker_model(a.out_prefix, res.model);
    }

    if (!a.trace_path.empty()) ntf::write_trace(a.trace_path, trace);
    std::printf("iters %zu final_loss %.17g\n", trace.back().iter, trace.back().loss);
    return 0;
}

int run_bench(const BenchArgs& a) {
    require_usage(!a.algos.empty(), "--algos must name at least one algorithm");
    require_usage(!a.seeds.empty(), "--seeds must list at least one seed");

    FitArgs base;
    base.model = a.model;
    base.beta = a.beta;
    base.rank = a.rank;
    base.ranks = a.ranks;
    base.inner = a.inner;
    base.max_iters = a.max_iters;
    base.eps = a.eps;
    for (const std::string& s : a.algos) parse_algo(s);  // validate up front

    ntf::DenseTensor x = ntf::read_tensor_auto(a.input);
    std::FILE* os = std::fopen(a.out.c_str(), "w");
    if (!os) throw ntf::FormatError("cannot open for writing: " + a.out);
    std::fputs("algo,seed,iter,time_s,loss\n", os);

    for (const std::string& algo : a.algos) {
        for (std::uint64_t seed : a.seeds) {
            FitArgs fa = base;
            fa.algo = algo;
            fa.seed = seed;
            const ntf::FitConfig cfg = to_config(fa);
            std::vector<ntf::TraceRecord> trace;
            if (cfg.model == ntf::ModelKind::cp) {
                ntf::CpFactors init = ntf::init_cp_factors(x.shape(), cfg.rank, seed, cfg.eps);
                switch (cfg.algo) {
                    case ntf::Algo::bcomm: trace = ntf::bcomm_fit(x, init, cfg).trace; break;
                    case ntf::Algo::jcomm: trace = ntf::jcomm_fit(x, init, cfg).trace; break;
                    case ntf::Algo::mu_unfold:
                        trace = ntf::mu_unfold_cp_fit(x, init, cfg).trace;
                        break;
                }
            } else {
                require_usage(a.ranks.size() == x.order(),
                              "--ranks must provide one core rank per tensor mode");
                ntf::TuckerModel init =
                    ntf::init_tucker_model(x.shape(), cfg.ranks, seed, cfg.eps);
                switch (cfg.algo) {
                    case ntf::Algo::bcomm:
                        trace = ntf::tucker_bcomm_fit(x, init, cfg).trace;
                        break;
                    case ntf::Algo::jcomm:
                        trace = ntf::tucker_jcomm_fit(x, init, cfg).trace;
                        break;
                    case ntf::Algo::mu_unfold:
                        trace = ntf::mu_unfold_tucker_fit(x, init, cfg).trace;
                        break;
                }
            }
            for (const ntf::TraceRecord& r : trace) {
                if (r.iter == 0) continue;  // data rows start at the first iteration
                std::fprintf(os, "%s,%llu,%zu,%.17g,%.17g\n", algo.c_str(),
                             static_cast<unsigned long long>(seed), r.iter, r.time_s, r.loss);
            }
        }
    }
    std::fclose(os);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nonnegative CP/Tucker decomposition under the beta-divergence"};
    app.require_subcommand(1);

    SynthArgs synth;
    CLI::App* synth_cp = app.add_subcommand("synth-cp", "generate a noiseless CP tensor");
    synth_cp->add_option("--dims", synth.dims, "tensor dimensions, comma separated")
        ->required()
        ->delimiter(',');
    synth_cp->add_option("--rank", synth.rank, "CP rank")->required();
    synth_cp->add_option("--seed", synth.seed, "random seed");
    synth_cp->add_option("--eps", synth.eps, "parameter floor");
    synth_cp->add_option("--out", synth.out, "output CTF1 tensor path")->required();
    synth_cp->add_option("--truth", synth.truth_prefix, "prefix for ground-truth factor files");

    CLI::App* synth_tk = app.add_subcommand("synth-tucker", "generate a noiseless Tucker tensor");
    synth_tk->add_option("--dims", synth.dims, "tensor dimensions, comma separated")
        ->required()
        ->delimiter(',');
    synth_tk->add_option("--ranks", synth.ranks, "core dimensions, comma separated")
        ->required()
        ->delimiter(',');
    synth_tk->add_option("--seed", synth.seed, "random seed");
    synth_tk->add_option("--eps", synth.eps, "parameter floor");
    synth_tk->add_option("--out", synth.out, "output CTF1 tensor path")->required();
    synth_tk->add_option("--truth", synth.truth_prefix, "prefix for ground-truth files");

    FitArgs fit;
    CLI::App* fitc = app.add_subcommand("fit", "fit a model to a CTF1 tensor");
    fitc->add_option("--input", fit.input, "input CTF1 tensor")->required();
    fitc->add_option("--model", fit.model, "cp | tucker")->check(CLI::IsMember({"cp", "tucker"}));
    fitc->add_option("--algo", fit.algo, "bcomm | jcomm | mu-unfold")
        ->check(CLI::IsMember({"bcomm", "jcomm", "mu-unfold"}));
    fitc->add_option("--beta", fit.beta, "divergence parameter in [0,2)");
    fitc->add_option("--rank", fit.rank, "CP rank");
    fitc->add_option("--ranks", fit.ranks, "Tucker core dimensions")->delimiter(',');
    fitc->add_option("--inner", fit.inner, "joint-MM inner sweeps per outer iteration");
    fitc->add_option("--max-iters", fit.max_iters, "outer iteration limit");
    fitc->add_option("--tol", fit.tol, "relative loss-change stopping tolerance");
    fitc->add_option("--seed", fit.seed, "initialization seed");
    fitc->add_option("--eps", fit.eps, "parameter floor (NTF_EPS overrides the default)");
    fitc->add_flag("--extrapolate", fit.extrapolate, "enable the inertial step");
    fitc->add_option("--extrap-cap", fit.extrap_cap, "extrapolation displacement cap constant");
    fitc->add_option(
            "--data-floor",
            [&fit](const std::vector<std::string>& v) {
                fit.data_floor = std::stod(v.at(0));
                return true;
            },
            "entrywise floor applied to the data before fitting")
        ->expected(1);
    fitc->add_option("--trace", fit.trace_path, "trace CSV output path");
    fitc->add_option("--out", fit.out_prefix, "prefix for fitted parameter files");

    BenchArgs bench;
    CLI::App* benchc = app.add_subcommand("bench", "run an algorithm set over a seed list");
    benchc->add_option("--input", bench.input, "input CTF1 tensor")->required();
    benchc->add_option("--model", bench.model, "cp | tucker")
        ->check(CLI::IsMember({"cp", "tucker"}));
    benchc->add_option("--algos", bench.algos, "comma-separated algorithm list")
        ->required()
        ->delimiter(',');
    benchc->add_option("--seeds", bench.seeds, "comma-separated seed list")
        ->required()
        ->delimiter(',');
    benchc->add_option("--beta", bench.beta, "divergence parameter in [0,2)");
    benchc->add_option("--rank", bench.rank, "CP rank");
    benchc->add_option("--ranks", bench.ranks, "Tucker core dimensions")->delimiter(',');
    benchc->add_option("--inner", bench.inner, "joint-MM inner sweeps");
    benchc->add_option("--max-iters", bench.max_iters, "outer iteration limit");
    benchc->add_option("--eps", bench.eps, "parameter floor");
    benchc->add_option("--out", bench.out, "long-format CSV output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (app.got_subcommand(synth_cp)) return run_synth_cp(synth);
        if (app.got_subcommand(synth_tk)) return run_synth_tucker(synth);
        if (app.got_subcommand(fitc)) return run_fit(fit);
        if (app.got_subcommand(benchc)) return run_bench(bench);
    } catch (const ntf::NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ntf::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
