#pragma once

#include <string>
#include <string_view>

// Opaque data-channel envelope used by the metadata-only client mode. The
// job body is ChaCha20-encrypted under a key shared by the lab client and the
// emulated printer, so an in-path observer sees only ciphertext while the
// printer still prints the original pages.
namespace printjack::opaque {

inline constexpr std::string_view kMagic = "\x1bPJOPQ1\n";

bool is_enveloped(std::string_view payload) noexcept;

std::string seal(std::string_view document);

/// Returns the payload unchanged when it carries no envelope.
std::string open(std::string_view payload);

}  // namespace printjack::opaque
