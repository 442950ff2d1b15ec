#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "bnsens/network.hpp"

namespace bnsens {

/// Parses a network document:
///
///   { "nodes":  [ {"id": 0, "name": "D1", "role": "disease"},
///                 {"id": 2, "name": "F1", "role": "finding", "phase": 1}, ... ],
///     "priors": [ {"node": 0, "p": 0.01}, ... ],
///     "cpds":   [ {"node": 2, "leak": 0.001,
///                  "links": [ {"parent": 0, "link": 0.8} ]}, ... ] }
///
/// Throws FormatError (syntax, missing keys, out-of-range probabilities,
/// dangling references; the message names the JSON path) or
/// InvalidNetworkError when the parsed network violates a structural rule.
Network load_network(std::string_view text);

/// Serializes with shortest round-trip decimal literals, so that
/// load_network(store_network(n)) == n bit for bit.
std::string store_network(const Network& net);

Network read_network_file(const std::filesystem::path& path);
void write_network_file(const Network& net, const std::filesystem::path& path);

/// Reads a whole file; throws FormatError when it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace bnsens
