#pragma once

#include <string>

#include "tdn/simproc.hpp"

namespace tdn {

/// Dataset files: a CSV with header {k, z_1..z_m, label, f_1..f_m, fault_id}
/// preceded by a single '#' comment line carrying the config hash, plus a
/// .meta.json sidecar with scenario, seed, onset and hash. Doubles are
/// written with %.17g, which round-trips exactly.
void write_dataset_csv(const Dataset& ds, const std::string& path, std::uint64_t config_hash);
Dataset read_dataset_csv(const std::string& path);

/// Atomic text-file write (temp + rename).
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

std::string format_double(double v);

} // namespace tdn
