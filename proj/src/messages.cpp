#include "psaa/messages.hpp"

#include <array>
#include <stdexcept>
#include <string>

namespace psaa::protocol {

namespace {

constexpr std::array<std::string_view, 9> kNames = {
    "RegRequest",         "RegResponse",      "PreNegRequest",   "PreNegResponse",   "AccessRequest",
    "AccessResponseUser", "AccessForwardTcs", "HandoverRequest", "HandoverResponse",
};

}  // namespace

std::string_view kind_name(MessageKind kind) { return kNames.at(static_cast<std::size_t>(kind)); }

MessageKind kind_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<MessageKind>(i);
  }
  throw std::invalid_argument("unknown message kind: " + std::string(name));
}

MessageKind kind_of(const Message& msg) { return static_cast<MessageKind>(msg.index()); }

}  // namespace psaa::protocol
