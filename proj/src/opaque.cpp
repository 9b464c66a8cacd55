#include "printjack/opaque.hpp"

#include <sodium.h>

#include <array>
#include <stdexcept>

namespace printjack::opaque {
namespace {

// Fixed lab key and nonce: the envelope hides content from the tap, it does
// not protect anything real.
constexpr std::array<unsigned char, crypto_stream_chacha20_KEYBYTES> kKey{
    0x50, 0x72, 0x69, 0x6e, 0x74, 0x6a, 0x61, 0x63, 0x6b, 0x2d, 0x6c, 0x61, 0x62, 0x2d, 0x6b, 0x65,
    0x79, 0x2d, 0x30, 0x30, 0x30, 0x31, 0x2d, 0x64, 0x6f, 0x2d, 0x6e, 0x6f, 0x74, 0x2d, 0x75, 0x73};
constexpr std::array<unsigned char, crypto_stream_chacha20_NONCEBYTES> kNonce{};

std::string xor_stream(std::string_view in) {
  if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
  std::string out(in.size(), '\0');
  if (!in.empty()) {
    crypto_stream_chacha20_xor(reinterpret_cast<unsigned char*>(out.data()),
                               reinterpret_cast<const unsigned char*>(in.data()), in.size(), kNonce.data(),
                               kKey.data());
  }
  return out;
}

}  // namespace

bool is_enveloped(std::string_view payload) noexcept { return payload.starts_with(kMagic); }

std::string seal(std::string_view document) {
  std::string out(kMagic);
  out += xor_stream(document);
  return out;
}

std::string open(std::string_view payload) {
  if (!is_enveloped(payload)) return std::string(payload);
  return xor_stream(payload.substr(kMagic.size()));
}

}  // namespace printjack::opaque
