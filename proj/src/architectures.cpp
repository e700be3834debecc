#include "tdn/architectures.hpp"

#include "tdn/errors.hpp"

namespace tdn {

namespace {
constexpr std::size_t kHidden = 100;
constexpr std::size_t kNarrow = 20;
constexpr std::size_t kLatent = 10;

using A = Activation;

Network heads_layer(std::size_t in, RngStream& rng) {
    return make_network({{in, kLatent, A::Affine}}, rng);
}
} // namespace

IdnModel build_idn(const std::string& id, std::size_t obs_dim, RngStream& rng) {
    A hidden;
    if (id == "D1")
        hidden = A::Affine;
    else if (id == "D2")
        hidden = A::Square;
    else if (id == "D3")
        hidden = A::Gaussian;
    else
        throw ConfigError("unknown IDN structure id: " + id);
    IdnModel m;
    m.core = make_network({{obs_dim, kHidden, A::Affine},
                           {kHidden, kHidden, hidden},
                           {kHidden, obs_dim, A::Affine}},
                          rng);
    return m;
}

VaeModel build_vae(const std::string& id, std::size_t obs_dim, RngStream& rng) {
    VaeModel m;
    m.latent_dim = kLatent;
    if (id == "V1" || id == "V2" || id == "V3") {
        const A trunk_act = (id == "V3") ? A::Tanh : A::Affine;
        const A dec_hidden = (id == "V2") ? A::Tanh : A::Affine;
        m.trunk = make_network({{obs_dim, kHidden, trunk_act}}, rng);
        m.mean_head = heads_layer(kHidden, rng);
        m.logvar_head = heads_layer(kHidden, rng);
        m.decoder = make_network(
            {{kLatent, kHidden, dec_hidden}, {kHidden, obs_dim, A::Affine}}, rng);
    } else if (id == "V4" || id == "V5" || id == "V6") {
        const A trunk_first = (id == "V4") ? A::Gaussian : A::Square;
        const A trunk_second = (id == "V6") ? A::Affine : A::Sigmoid;
        m.trunk = make_network(
            {{obs_dim, kHidden, trunk_first}, {kHidden, kNarrow, trunk_second}}, rng);
        m.mean_head = heads_layer(kNarrow, rng);
        m.logvar_head = heads_layer(kNarrow, rng);
        m.decoder = make_network({{kLatent, kNarrow, A::Sigmoid},
                                  {kNarrow, kHidden, A::Sigmoid},
                                  {kHidden, obs_dim, A::Affine}},
                                 rng);
    } else {
        throw ConfigError("unknown VAE structure id: " + id);
    }
    validate_vae(m);
    return m;
}

} // namespace tdn
