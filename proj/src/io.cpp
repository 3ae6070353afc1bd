#include "ntf/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ntf {

namespace {

constexpr char kMagic[4] = {'C', 'T', 'F', '1'};

void put_u64le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

}  // namespace

void write_tensor(const std::string& path, const DenseTensor& t) {
    if (t.order() > 255) throw FormatError("write_tensor: order exceeds format limit of 255");
    std::string buf;
    buf.reserve(5 + 8 * t.order() + 8 * t.size());
    buf.append(kMagic, 4);
    buf.push_back(static_cast<char>(t.order()));
    for (std::size_t d : t.shape()) put_u64le(buf, d);
    for (std::size_t i = 0; i < t.size(); ++i)
        put_u64le(buf, std::bit_cast<std::uint64_t>(t[i]));

    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw FormatError("cannot open for writing: " + path);
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!os) throw FormatError("write failed: " + path);
}

DenseTensor read_tensor(const std::string& path, std::size_t max_entries) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open: " + path);
    std::string buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    const auto* p = reinterpret_cast<const unsigned char*>(buf.data());

    if (buf.size() < 5 || std::memcmp(buf.data(), kMagic, 4) != 0)
        throw FormatError("bad magic: not a CTF1 tensor file: " + path);
    const std::size_t order = p[4];
    if (order == 0) throw FormatError("CTF1: zero tensor order");
    if (buf.size() < 5 + 8 * order) throw FormatError("CTF1: truncated header");

    std::vector<std::size_t> shape(order);
    std::size_t entries = 1;
    for (std::size_t n = 0; n < order; ++n) {
        const std::uint64_t d = get_u64le(p + 5 + 8 * n);
        if (d == 0) throw FormatError("CTF1: zero dimension");
        if (d > max_entries || entries > max_entries / d)
            throw FormatError("CTF1: tensor exceeds the entry budget");
        shape[n] = static_cast<std::size_t>(d);
        entries *= shape[n];
    }

    const std::size_t payload = 5 + 8 * order;
    if (buf.size() != payload + 8 * entries)
        throw FormatError(buf.size() < payload + 8 * entries ? "CTF1: truncated payload"
                                                             : "CTF1: trailing bytes");
    std::vector<double> values(entries);
    for (std::size_t i = 0; i < entries; ++i)
        values[i] = std::bit_cast<double>(get_u64le(p + payload + 8 * i));
    return DenseTensor(std::move(shape), std::move(values));
}

namespace {

bool blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

DenseTensor read_coo(const std::string& path, std::optional<double> floor,
                     std::size_t max_entries) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open: " + path);

    std::string line;
    std::size_t lineno = 0;
    std::vector<std::size_t> dims;

    // header: `dims: I1 I2 ... IN`
    while (std::getline(is, line)) {
        ++lineno;
        if (blank(line)) continue;
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag != "dims:") throw ParseError("expected `dims: I1 I2 ... IN`", lineno);
        std::size_t entries = 1;
        long long d = 0;
        while (ss >> d) {
            if (d <= 0) throw ParseError("dimensions must be positive", lineno);
            const auto du = static_cast<std::size_t>(d);
            if (du > max_entries || entries > max_entries / du)
                throw ParseError("tensor exceeds the entry budget", lineno);
            entries *= du;
            dims.push_back(du);
        }
        if (!ss.eof()) throw ParseError("malformed dimension list", lineno);
        if (dims.empty()) throw ParseError("empty dimension list", lineno);
        break;
    }
    if (dims.empty()) throw FormatError("missing `dims:` header line: " + path);

    DenseTensor t(dims);
    MultiIndex idx(dims.size());
    while (std::getline(is, line)) {
        ++lineno;
        if (blank(line)) continue;
        std::istringstream ss(line);
        for (std::size_t n = 0; n < dims.size(); ++n) {
            long long i = 0;
            if (!(ss >> i)) throw ParseError("malformed entry line", lineno);
            if (i < 0 || static_cast<std::size_t>(i) >= dims[n])
                throw ParseError("index out of range for mode " + std::to_string(n + 1), lineno);
            idx[n] = static_cast<std::size_t>(i);
        }
        double v = 0.0;
        if (!(ss >> v)) throw ParseError("malformed or missing value", lineno);
        std::string rest;
        if (ss >> rest) throw ParseError("trailing tokens after value", lineno);
        if (v < 0.0) throw ParseError("negative value", lineno);
        t.at(idx) += v;  // duplicates accumulate
    }
    if (floor) return cwise_max(t, *floor);
    return t;
}

DenseTensor read_tensor_auto(const std::string& path, std::size_t max_entries) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open: " + path);
    char head[4] = {};
    is.read(head, 4);
    if (is.gcount() == 4 && std::memcmp(head, kMagic, 4) == 0)
        return read_tensor(path, max_entries);
    return read_coo(path, std::nullopt, max_entries);
}

void write_trace(const std::string& path, std::span<const TraceRecord> records) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw FormatError("cannot open for writing: " + path);
    os << "iter,time_s,loss\n";
    char buf[128];
    for (const TraceRecord& r : records) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", r.iter, r.time_s, r.loss);
        os << buf;
    }
    if (!os) throw FormatError("write failed: " + path);
}

std::vector<TraceRecord> read_trace(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open: " + path);
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(is, line) || line != "iter,time_s,loss")
        throw ParseError("missing trace header", 1);
    ++lineno;
    std::vector<TraceRecord> out;
    while (std::getline(is, line)) {
        ++lineno;
        if (blank(line)) continue;
        TraceRecord r;
        std::uintmax_t iter = 0;
        if (std::sscanf(line.c_str(), "%ju,%lg,%lg", &iter, &r.time_s, &r.loss) != 3)
            throw ParseError("malformed trace row", lineno);
        r.iter = static_cast<std::size_t>(iter);
        out.push_back(r);
    }
    return out;
}

// ---- generators ---------------------------------------------------------------

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream & 0xffffffffu),
                      static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
}

double Rng::uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double eps) {
    Matrix m(rows, cols);
    for (double& v : m.values()) v = std::max(rng.uniform01(), eps);
    return m;
}

}  // namespace

CpFactors random_cp_factors(std::span<const std::size_t> dims, std::size_t rank, Rng& rng,
                            double eps) {
    std::vector<Matrix> f;
    f.reserve(dims.size());
    for (std::size_t d : dims) f.push_back(random_matrix(d, rank, rng, eps));
    return CpFactors(std::move(f));
}

TuckerModel random_tucker_model(std::span<const std::size_t> dims,
                                std::span<const std::size_t> ranks, Rng& rng, double eps) {
    if (dims.size() != ranks.size())
        throw ShapeError("random_tucker_model: dims and ranks length mismatch");
    DenseTensor core(std::vector<std::size_t>(ranks.begin(), ranks.end()));
    for (double& v : core.values()) v = std::max(rng.uniform01(), eps);
    std::vector<Matrix> f;
    f.reserve(dims.size());
    for (std::size_t n = 0; n < dims.size(); ++n)
        f.push_back(random_matrix(dims[n], ranks[n], rng, eps));
    return TuckerModel(std::move(core), std::move(f));
}

CpFactors init_cp_factors(std::span<const std::size_t> dims, std::size_t rank, std::uint64_t seed,
                          double eps) {
    Rng rng(seed, Rng::kInitStream);
    return random_cp_factors(dims, rank, rng, eps);
}

TuckerModel init_tucker_model(std::span<const std::size_t> dims,
                              std::span<const std::size_t> ranks, std::uint64_t seed, double eps) {
    Rng rng(seed, Rng::kInitStream);
    return random_tucker_model(dims, ranks, rng, eps);
}

std::pair<DenseTensor, CpFactors> synth_cp(std::span<const std::size_t> dims, std::size_t rank,
                                           std::uint64_t seed, double eps) {
    Rng rng(seed, Rng::kSynthStream);
    CpFactors truth = random_cp_factors(dims, rank, rng, eps);
    DenseTensor x = cp_reconstruct(truth);
    return {std::move(x), std::move(truth)};
}

std::pair<DenseTensor, TuckerModel> synth_tucker(std::span<const std::size_t> dims,
                                                 std::span<const std::size_t> ranks,
                                                 std::uint64_t seed, double eps) {
    Rng rng(seed, Rng::kSynthStream);
    TuckerModel truth = random_tucker_model(dims, ranks, rng, eps);
    DenseTensor x = tucker_reconstruct(truth);
    return {std::move(x), std::move(truth)};
}

}  // namespace ntf
