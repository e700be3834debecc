#include "tdn/model_io.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>

#include "tdn/errors.hpp"
#include "tdn/rng.hpp"

namespace tdn {

namespace {

constexpr char kMagic[8] = {'T', 'D', 'N', 'M', 'D', 'L', '\r', '\n'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }

void put_f64(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xff));
}

void put_str(std::vector<std::uint8_t>& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

struct Reader {
    const std::vector<std::uint8_t>& buf;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > buf.size()) throw IoError("model stream truncated");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint8_t u8() {
        need(1);
        return buf[pos++];
    }
    double f64() {
        need(8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[pos + i]) << (8 * i);
        pos += 8;
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    std::string str() {
        const std::uint32_t n = u32();
        need(n);
        std::string s(reinterpret_cast<const char*>(buf.data() + pos), n);
        pos += n;
        return s;
    }
};

void put_network(std::vector<std::uint8_t>& out, const Network& net) {
    put_u32(out, static_cast<std::uint32_t>(net.num_layers()));
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        const auto& s = net.spec[l];
        put_u32(out, static_cast<std::uint32_t>(s.in_dim));
        put_u32(out, static_cast<std::uint32_t>(s.out_dim));
        put_u8(out, static_cast<std::uint8_t>(s.activation));
        put_u8(out, net.params[l].frozen ? 1 : 0);
    }
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        for (double w : net.params[l].weight.data()) put_f64(out, w);
        for (double b : net.params[l].bias) put_f64(out, b);
    }
}

Network read_network(Reader& r) {
    Network net;
    const std::uint32_t n_layers = r.u32();
    if (n_layers == 0 || n_layers > 1000) throw IoError("implausible layer count in model file");
    std::vector<bool> frozen;
    for (std::uint32_t l = 0; l < n_layers; ++l) {
        LayerSpec s;
        s.in_dim = r.u32();
        s.out_dim = r.u32();
        const std::uint8_t act = r.u8();
        if (act > 4) throw IoError("unknown activation tag in model file");
        s.activation = static_cast<Activation>(act);
        frozen.push_back(r.u8() != 0);
        net.spec.push_back(s);
    }
    for (std::uint32_t l = 0; l < n_layers; ++l) {
        DenseParams p;
        p.weight = Matrix(net.spec[l].out_dim, net.spec[l].in_dim);
        for (double& w : p.weight.data()) w = r.f64();
        p.bias.resize(net.spec[l].out_dim);
        for (double& b : p.bias) b = r.f64();
        p.frozen = frozen[l];
        net.params.push_back(std::move(p));
    }
    try {
        validate_network(net);
    } catch (const std::exception& e) {
        throw IoError(std::string("model file dimension inconsistency: ") + e.what());
    }
    return net;
}

} // namespace

const Network& ModelBundle::network(const std::string& name) const {
    for (const auto& [n, net] : networks)
        if (n == name) return net;
    throw IoError("model bundle has no network named '" + name + "'");
}

Network& ModelBundle::network(const std::string& name) {
    for (auto& [n, net] : networks)
        if (n == name) return net;
    throw IoError("model bundle has no network named '" + name + "'");
}

std::vector<std::uint8_t> serialize_model(const ModelBundle& m) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + sizeof(kMagic));
    put_u32(out, kFormatVersion);
    put_str(out, m.role);
    put_u32(out, static_cast<std::uint32_t>(m.networks.size()));
    for (const auto& [name, net] : m.networks) {
        put_str(out, name);
        put_network(out, net);
    }
    put_u8(out, m.scaler ? 1 : 0);
    if (m.scaler) {
        put_u32(out, static_cast<std::uint32_t>(m.scaler->dim()));
        for (double v : m.scaler->mean) put_f64(out, v);
        for (double v : m.scaler->std) put_f64(out, v);
    }
    put_u32(out, static_cast<std::uint32_t>(m.meta.size()));
    for (const auto& [k, v] : m.meta) {
        put_str(out, k);
        put_f64(out, v);
    }
    return out;
}

ModelBundle parse_model(const std::vector<std::uint8_t>& bytes) {
    Reader r{bytes};
    r.need(sizeof(kMagic));
    if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
        throw IoError("not a model file (bad magic)");
    r.pos = sizeof(kMagic);
    const std::uint32_t version = r.u32();
    if (version != kFormatVersion)
        throw IoError("unsupported model format version " + std::to_string(version) +
                      " (expected " + std::to_string(kFormatVersion) + ")");
    ModelBundle m;
    m.role = r.str();
    const std::uint32_t n_nets = r.u32();
    if (n_nets > 64) throw IoError("implausible network count in model file");
    for (std::uint32_t i = 0; i < n_nets; ++i) {
        std::string name = r.str();
        m.networks.emplace_back(std::move(name), read_network(r));
    }
    if (r.u8()) {
        Scaler s;
        const std::uint32_t dim = r.u32();
        s.mean.resize(dim);
        for (double& v : s.mean) v = r.f64();
        s.std.resize(dim);
        for (double& v : s.std) v = r.f64();
        m.scaler = std::move(s);
    }
    const std::uint32_t n_meta = r.u32();
    for (std::uint32_t i = 0; i < n_meta; ++i) {
        std::string k = r.str();
        m.meta[k] = r.f64();
    }
    if (r.pos != bytes.size()) throw IoError("trailing bytes in model file");
    return m;
}

void save_model(const ModelBundle& m, const std::string& path) {
    const auto bytes = serialize_model(m);
    const std::string tmp = path + ".tmp";
    std::FILE* f = std::fopen(tmp.c_str(), "wb");
    if (!f) throw IoError("cannot open " + tmp + " for writing");
    const std::size_t written = std::fwrite(bytes.data(), 1, bytes.size(), f);
    const int rc = std::fclose(f);
    if (written != bytes.size() || rc != 0) {
        std::remove(tmp.c_str());
        throw IoError("short write to " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::remove(tmp.c_str());
        throw IoError("cannot rename " + tmp + " to " + path + ": " + ec.message());
    }
}

ModelBundle load_model(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw IoError("cannot open model file " + path);
    std::fseek(f, 0, SEEK_END);
    const long size = std::ftell(f);
    std::fseek(f, 0, SEEK_SET);
    std::vector<std::uint8_t> bytes(size > 0 ? static_cast<std::size_t>(size) : 0);
    const std::size_t got = bytes.empty() ? 0 : std::fread(bytes.data(), 1, bytes.size(), f);
    std::fclose(f);
    if (got != bytes.size()) throw IoError("cannot read model file " + path);
    return parse_model(bytes);
}

std::uint64_t model_checksum(const ModelBundle& m) {
    const auto bytes = serialize_model(m);
    return fnv1a64(bytes.data(), bytes.size());
}

} // namespace tdn
