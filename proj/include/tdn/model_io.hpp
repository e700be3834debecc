#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tdn/network.hpp"
#include "tdn/scaler.hpp"

namespace tdn {

/// On-disk model container: a role tag ("vae" / "idn" / "tdn"), named
/// networks, an optional scaler and scalar metadata. The binary layout is
/// little-endian with a fixed parameter order (layer index, weight before
/// bias); load(serialize(m)) reproduces every double bit-exactly.
struct ModelBundle {
    std::string role;
    std::vector<std::pair<std::string, Network>> networks;
    std::optional<Scaler> scaler;
    std::map<std::string, double> meta;

    const Network& network(const std::string& name) const;
    Network& network(const std::string& name);
};

std::vector<std::uint8_t> serialize_model(const ModelBundle& m);
ModelBundle parse_model(const std::vector<std::uint8_t>& bytes);

/// Atomic write (temp file + rename).
void save_model(const ModelBundle& m, const std::string& path);
ModelBundle load_model(const std::string& path);

/// FNV-1a over the serialized bytes; used for the frozen-VAE contract check.
std::uint64_t model_checksum(const ModelBundle& m);

} // namespace tdn
