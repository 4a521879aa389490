#include "ucr/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "ucr/errors.hpp"

namespace ucr {
namespace {

constexpr std::array<char, 3> kMagic{'U', 'C', 'R'};
constexpr char kVersion = '1';
// Guards against absurd allocations from corrupt length fields.
constexpr std::uint64_t kMaxLength = std::uint64_t{1} << 34;

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void u64(std::uint64_t v) {
        std::array<char, 8> b;
        for (std::size_t i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
        out_.write(b.data(), b.size());
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void bytes(std::string_view s) {
        u64(s.size());
        out_.write(s.data(), static_cast<std::streamsize>(s.size()));
    }
    void tensor(const Tensor& t) {
        const auto dims = t.shape().dims();
        u64(dims.size());
        for (auto d : dims) u64(d);
        for (double v : t.values()) f64(v);
    }
    void tensors(const std::vector<Tensor>& ts) {
        u64(ts.size());
        for (const auto& t : ts) tensor(t);
    }

private:
    std::ostream& out_;
};

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    void raw(char* dst, std::size_t n) {
        in_.read(dst, static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) throw ParseError("checkpoint is truncated", 0);
    }
    std::uint64_t u64() {
        std::array<unsigned char, 8> b;
        raw(reinterpret_cast<char*>(b.data()), b.size());
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::uint64_t length() {
        const auto n = u64();
        if (n > kMaxLength) throw ParseError("checkpoint length field is implausible", 0);
        return n;
    }
    std::string bytes() {
        std::string s(length(), '\0');
        raw(s.data(), s.size());
        return s;
    }
    Tensor tensor() {
        const auto rank = u64();
        Shape shape;
        if (rank == 0) {
            shape = Shape::scalar();
        } else if (rank == 1) {
            shape = Shape::vector(length());
        } else if (rank == 2) {
            const auto r = length();
            const auto c = length();
            shape = Shape::matrix(r, c);
        } else {
            throw ParseError("checkpoint tensor has unsupported rank " + std::to_string(rank), 0);
        }
        if (shape.size() > kMaxLength) throw ParseError("checkpoint tensor is implausibly large", 0);
        std::vector<double> v(shape.size());
        for (auto& x : v) x = f64();
        return Tensor(std::move(v), shape);
    }
    std::vector<Tensor> tensors() {
        const auto n = length();
        std::vector<Tensor> out;
        out.reserve(n);
        for (std::uint64_t i = 0; i < n; ++i) out.push_back(tensor());
        return out;
    }
    bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

private:
    std::istream& in_;
};

void check_shapes(const std::vector<Tensor>& got, const std::vector<Tensor>& expected, const char* what) {
    if (got.size() != expected.size()) {
        throw ParseError(std::string("checkpoint has ") + std::to_string(got.size()) + " " + what + " arrays, expected " +
                             std::to_string(expected.size()),
                         0);
    }
    for (std::size_t i = 0; i < got.size(); ++i) {
        if (got[i].shape() != expected[i].shape()) {
            throw ParseError(std::string("checkpoint ") + what + " array " + std::to_string(i) + " has shape " +
                                 got[i].shape().to_string() + ", expected " + expected[i].shape().to_string(),
                             0);
        }
    }
}

}  // namespace

Checkpoint initial_checkpoint(const Vocab& vocab, const TrainConfig& cfg) {
    cfg.validate();
    Checkpoint ck;
    ck.config = cfg;
    ck.vocab = vocab;
    ck.params = init_model(vocab.size(), cfg.encoder, cfg.seed);
    ck.optimizer = AdamState::zeros_like(ck.params.flatten());
    return ck;
}

void write_checkpoint(const Checkpoint& ck, std::ostream& out) {
    out.write(kMagic.data(), kMagic.size());
    out.put(kVersion);
    Writer w(out);
    w.u64(ck.step);
    w.bytes(to_json(ck.config).dump());
    w.u64(ck.vocab.size());
    for (const auto& t : ck.vocab.tokens()) w.bytes(t);
    w.tensors(ck.params.flatten());
    w.tensors(ck.optimizer.m);
    w.tensors(ck.optimizer.v);
}

Checkpoint read_checkpoint(std::istream& in) {
    Reader r(in);
    std::array<char, 4> magic{};
    r.raw(magic.data(), magic.size());
    if (!std::equal(kMagic.begin(), kMagic.end(), magic.begin())) throw ParseError("not a checkpoint file", 0);
    if (magic[3] != kVersion) {
        throw IncompatibleVersionError(std::string("checkpoint format version '") + magic[3] + "' is not supported (expected '" +
                                       kVersion + "')");
    }
    Checkpoint ck;
    ck.step = r.u64();
    const std::string config = r.bytes();
    try {
        ck.config = train_config_from_json(nlohmann::json::parse(config));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("checkpoint config is not valid JSON: ") + e.what(), 0);
    } catch (const ConfigError& e) {
        throw ParseError(std::string("checkpoint config is invalid: ") + e.what(), 0);
    }
    const auto n_tokens = r.length();
    std::vector<std::string> tokens;
    tokens.reserve(n_tokens);
    for (std::uint64_t i = 0; i < n_tokens; ++i) tokens.push_back(r.bytes());
    if (n_tokens < kSpecialTokenCount) throw ParseError("checkpoint vocabulary lacks special tokens", 0);
    for (std::size_t i = 0; i < kSpecialTokenCount; ++i) {
        if (tokens[i] != to_string(static_cast<SpecialToken>(i))) throw ParseError("checkpoint special tokens out of order", 0);
    }
    try {
        ck.vocab = Vocab(std::vector<std::string>(tokens.begin() + kSpecialTokenCount, tokens.end()));
    } catch (const ContractError& e) {
        throw ParseError(e.what(), 0);
    }

    // Shapes implied by the config, used to validate the arrays.
    ModelParams shapes;
    shapes.encoder.config = ck.config.encoder;
    shapes.encoder.embedding = Tensor::zeros(Shape::matrix(ck.vocab.size(), ck.config.encoder.dim));
    shapes.encoder.ff_weight = Tensor::zeros(Shape::matrix(ck.config.encoder.dim, ck.config.encoder.dim));
    shapes.encoder.ff_bias = Tensor::zeros(Shape::vector(ck.config.encoder.dim));
    if (ck.config.encoder.position_embedding) {
        shapes.encoder.position = Tensor::zeros(Shape::matrix(ck.config.encoder.max_positions, ck.config.encoder.dim));
    }
    shapes.fusion.gate = Tensor::zeros(Shape::vector(2 * ck.config.encoder.dim));
    const auto expected = shapes.flatten();

    auto params = r.tensors();
    check_shapes(params, expected, "parameter");
    ck.optimizer.m = r.tensors();
    check_shapes(ck.optimizer.m, expected, "first-moment");
    ck.optimizer.v = r.tensors();
    check_shapes(ck.optimizer.v, expected, "second-moment");
    ck.optimizer.step = ck.step;
    if (!r.at_end()) throw ParseError("trailing bytes after checkpoint", 0);

    ck.params = std::move(shapes);
    ck.params.assign(params);
    return ck;
}

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    write_checkpoint(ck, out);
    out.flush();
    if (!out) throw Error("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open checkpoint " + path.string(), 0);
    return read_checkpoint(in);
}

}  // namespace ucr
