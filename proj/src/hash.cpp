#include "chronoseq/hash.hpp"

#include <openssl/evp.h>

#include "chronoseq/error.hpp"

namespace chronoseq {

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorCode::internal, "SHA-256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out(2 * len, '0');
  for (unsigned i = 0; i < len; ++i) {
    out[2 * i] = hex[digest[i] >> 4];
    out[2 * i + 1] = hex[digest[i] & 0xF];
  }
  return out;
}

std::string content_id(std::string_view data, std::size_t chars) { return sha256_hex(data).substr(0, chars); }

}  // namespace chronoseq
