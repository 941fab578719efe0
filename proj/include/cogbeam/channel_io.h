#ifndef COGBEAM_CHANNEL_IO_H_
#define COGBEAM_CHANNEL_IO_H_

#include <string>
#include <string_view>

#include "cogbeam/scenario.h"

namespace cogbeam {

// JSON fixture format ("cogbeam-channels/1"). Matrices are objects
// {"rows", "cols", "re", "im"} with entries in column-major order; doubles
// are written with round-trip precision so Parse(Serialize(x)) == x exactly.
std::string SerializeChannelSet(const ChannelSet& ch);

// Throws kParseError on malformed input and kShapeMismatch on inconsistent
// dimensions.
ChannelSet ParseChannelSet(std::string_view text);

}  // namespace cogbeam

#endif  // COGBEAM_CHANNEL_IO_H_
