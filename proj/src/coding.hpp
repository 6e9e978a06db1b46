/*
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef NCTCP_CODING_HPP
#define NCTCP_CODING_HPP

// Random linear coding over GF(2^8) with "seen packet" acknowledgements.
//
// The sender mixes every packet of its current coding window into each coded
// packet. The receiver keeps the received combinations in reduced row
// echelon form. Packet k is *seen* once some row has its pivot in column k;
// the cumulative ACK is the length of the seen prefix, so every innovative
// arrival moves it forward even when the arrival does not decode anything.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "rng.hpp"

namespace nctcp::coding {

using Bytes = std::vector<std::uint8_t>;

struct CodedPacket {
  std::uint32_t base_index = 0;     // index of the first packet mixed in
  std::vector<std::uint8_t> coeffs; // one GF(2^8) coefficient per packet
  Bytes payload;                    // sum of coeffs[k] * packet[base_index + k]
};

/// Random combination of `window` (packets base_index, base_index+1, ...).
/// Coefficients are i.i.d. uniform; an all-zero draw is redrawn.
/// Throws std::invalid_argument on an empty window or ragged payloads.
CodedPacket encode(std::uint32_t base_index, std::span<const Bytes> window, Rng& rng);

/// Same, with caller-chosen coefficients.
CodedPacket encode_with(std::uint32_t base_index, std::span<const Bytes> window,
                        std::span<const std::uint8_t> coeffs);

// Wire layout: base_index (u32 big-endian), coefficient count (u16
// big-endian), coefficients, payload.
Bytes serialize(const CodedPacket& pkt);
CodedPacket parse(std::span<const std::uint8_t> wire);

struct ReceiveResult {
  bool innovative = false;
  std::uint32_t seen_front = 0;
};

struct DecodedPacket {
  std::uint32_t index = 0;
  Bytes payload;
};

class Decoder {
 public:
  explicit Decoder(std::size_t payload_len);

  /// Inserts a combination. Throws std::invalid_argument when the payload
  /// length is wrong, the coefficient vector is empty, or the packet refers
  /// to packets that have already been released.
  ReceiveResult receive(const CodedPacket& pkt);

  /// Every decoded packet not yet handed out by take_in_order(), by index.
  std::vector<DecodedPacket> decode() const;

  /// Hands out (up to max_packets of) the in-order decoded prefix and
  /// releases it.
  std::vector<Bytes> take_in_order(std::size_t max_packets = std::numeric_limits<std::size_t>::max());

  std::uint32_t seen_front() const { return seen_front_; }
  std::uint32_t decoded_front() const { return decoded_front_; }
  /// Rank of everything received so far.
  std::size_t dof() const { return decoded_count_ + rows_.size(); }
  std::size_t payload_len() const { return payload_len_; }

 private:
  struct Row {
    std::uint32_t pivot = 0;  // absolute column
    std::vector<std::uint8_t> coeffs;  // columns [lo_, hi_)
    Bytes payload;
  };

  std::size_t width() const { return hi_ - lo_; }
  void extend_to(std::uint32_t hi);
  bool is_decoded(std::uint32_t col) const;
  bool has_pivot(std::uint32_t col) const;
  void harvest_decoded();
  void compact();
  void release();

  std::size_t payload_len_;
  std::uint32_t lo_ = 0;
  std::uint32_t hi_ = 0;
  std::vector<Row> rows_;
  std::vector<int> pivot_row_;     // per column in [lo_, hi_), -1 when none
  std::vector<bool> decoded_col_;  // per column in [lo_, hi_)
  std::map<std::uint32_t, Bytes> decoded_;

  std::uint32_t seen_front_ = 0;
  std::uint32_t decoded_front_ = 0;
  std::uint32_t consumed_front_ = 0;
  std::uint32_t watermark_ = 0;  // highest base_index received
  std::size_t decoded_count_ = 0;
};

}  // namespace nctcp::coding

#endif  // NCTCP_CODING_HPP
