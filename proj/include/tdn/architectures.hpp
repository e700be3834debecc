#pragma once

#include <string>

#include "tdn/idn.hpp"
#include "tdn/vae.hpp"

namespace tdn {

/// Catalog of the studied network structures. IDN cores D1..D3 differ in the
/// hidden activation (affine / square / gaussian); VAEs V1..V6 differ in
/// trunk/decoder depth and activations, all with a 10-dimensional latent.
IdnModel build_idn(const std::string& structure_id, std::size_t obs_dim, RngStream& rng);
VaeModel build_vae(const std::string& structure_id, std::size_t obs_dim, RngStream& rng);

} // namespace tdn
