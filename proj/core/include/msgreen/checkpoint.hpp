#pragma once

// Plain-text model checkpoints. Doubles are written in shortest round-trip
// form, so save/load reproduces parameters bit-exactly.

#include "msgreen/msnn.hpp"
#include "msgreen/net.hpp"

#include <filesystem>
#include <iosfwd>

namespace msgreen::checkpoint {

void write_network(std::ostream& out, const net::Network& n);
net::Network read_network(std::istream& in);

void save_network(const net::Network& n, const std::filesystem::path& path);
net::Network load_network(const std::filesystem::path& path);

void save_msnet(const msnn::MsNet& ms, const std::filesystem::path& path);
msnn::MsNet load_msnet(const std::filesystem::path& path);

}  // namespace msgreen::checkpoint
