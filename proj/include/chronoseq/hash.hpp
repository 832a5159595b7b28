#pragma once

#include <string>
#include <string_view>

namespace chronoseq {

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// Short content address: the first `chars` hex digits of the SHA-256.
std::string content_id(std::string_view data, std::size_t chars = 16);

}  // namespace chronoseq
