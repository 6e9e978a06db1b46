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

#include "coding.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "gf256.hpp"

namespace nctcp::coding {

namespace {

void check_window(std::span<const Bytes> window) {
  if (window.empty()) throw std::invalid_argument("encode: empty coding window");
  if (window.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw std::invalid_argument("encode: coding window larger than 65535 packets");
  }
  const auto len = window.front().size();
  for (const auto& pkt : window) {
    if (pkt.size() != len) throw std::invalid_argument("encode: payload lengths differ");
  }
}

// Columns are kept compact once this many leading columns are decoded.
constexpr std::uint32_t kCompactThreshold = 64;

}  // namespace

CodedPacket encode_with(std::uint32_t base_index, std::span<const Bytes> window,
                        std::span<const std::uint8_t> coeffs) {
  check_window(window);
  if (coeffs.size() != window.size()) {
    throw std::invalid_argument("encode: coefficient count does not match window");
  }
  CodedPacket out;
  out.base_index = base_index;
  out.coeffs.assign(coeffs.begin(), coeffs.end());
  out.payload.assign(window.front().size(), 0);
  for (std::size_t k = 0; k < window.size(); ++k) {
    gf256::mul_add(out.payload, window[k], coeffs[k]);
  }
  return out;
}

CodedPacket encode(std::uint32_t base_index, std::span<const Bytes> window, Rng& rng) {
  check_window(window);
  std::vector<std::uint8_t> coeffs(window.size());
  bool all_zero = true;
  do {
    all_zero = true;
    for (auto& c : coeffs) {
      c = rng.byte();
      if (c != 0) all_zero = false;
    }
  } while (all_zero);
  return encode_with(base_index, window, coeffs);
}

Bytes serialize(const CodedPacket& pkt) {
  if (pkt.coeffs.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw std::invalid_argument("serialize: too many coefficients");
  }
  Bytes out;
  out.reserve(6 + pkt.coeffs.size() + pkt.payload.size());
  for (int shift = 24; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>(pkt.base_index >> shift));
  }
  const auto n = static_cast<std::uint16_t>(pkt.coeffs.size());
  out.push_back(static_cast<std::uint8_t>(n >> 8));
  out.push_back(static_cast<std::uint8_t>(n));
  out.insert(out.end(), pkt.coeffs.begin(), pkt.coeffs.end());
  out.insert(out.end(), pkt.payload.begin(), pkt.payload.end());
  return out;
}

CodedPacket parse(std::span<const std::uint8_t> wire) {
  if (wire.size() < 6) throw std::invalid_argument("parse: truncated header");
  CodedPacket pkt;
  pkt.base_index = (std::uint32_t{wire[0]} << 24) | (std::uint32_t{wire[1]} << 16) |
                   (std::uint32_t{wire[2]} << 8) | std::uint32_t{wire[3]};
  const std::size_t n = (std::size_t{wire[4]} << 8) | wire[5];
  if (wire.size() < 6 + n) throw std::invalid_argument("parse: truncated coefficients");
  pkt.coeffs.assign(wire.begin() + 6, wire.begin() + 6 + static_cast<std::ptrdiff_t>(n));
  pkt.payload.assign(wire.begin() + 6 + static_cast<std::ptrdiff_t>(n), wire.end());
  return pkt;
}

// ---- Decoder ----------------------------------------------------------------

Decoder::Decoder(std::size_t payload_len) : payload_len_(payload_len) {}

bool Decoder::is_decoded(std::uint32_t col) const {
  return col < lo_ || (col < hi_ && decoded_col_[col - lo_]);
}

bool Decoder::has_pivot(std::uint32_t col) const {
  return col >= lo_ && col < hi_ && pivot_row_[col - lo_] >= 0;
}

void Decoder::extend_to(std::uint32_t hi) {
  if (hi <= hi_) return;
  const std::size_t w = hi - lo_;
  for (auto& row : rows_) row.coeffs.resize(w, 0);
  pivot_row_.resize(w, -1);
  decoded_col_.resize(w, false);
  hi_ = hi;
}

ReceiveResult Decoder::receive(const CodedPacket& pkt) {
  if (pkt.payload.size() != payload_len_) {
    throw std::invalid_argument("receive: payload length does not match decoder");
  }
  if (pkt.coeffs.empty()) throw std::invalid_argument("receive: empty coefficient vector");
  const std::uint64_t end = std::uint64_t{pkt.base_index} + pkt.coeffs.size();
  if (end > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("receive: packet index overflow");
  }
  extend_to(static_cast<std::uint32_t>(end));
  watermark_ = std::max(watermark_, pkt.base_index);

  std::vector<std::uint8_t> row(width(), 0);
  Bytes payload = pkt.payload;
  for (std::size_t k = 0; k < pkt.coeffs.size(); ++k) {
    const std::uint8_t c = pkt.coeffs[k];
    if (c == 0) continue;
    const auto col = static_cast<std::uint32_t>(pkt.base_index + k);
    if (is_decoded(col)) {
      auto it = decoded_.find(col);
      if (it == decoded_.end()) {
        throw std::invalid_argument("receive: packet refers to an already released packet");
      }
      gf256::mul_add(payload, it->second, c);
    } else {
      row[col - lo_] ^= c;
    }
  }

  // Rows are in RREF, so one ascending sweep clears every pivot column.
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j] == 0 || pivot_row_[j] < 0) continue;
    const Row& r = rows_[static_cast<std::size_t>(pivot_row_[j])];
    const std::uint8_t c = row[j];
    gf256::mul_add(row, r.coeffs, c);
    gf256::mul_add(payload, r.payload, c);
  }

  const auto lead = std::find_if(row.begin(), row.end(), [](std::uint8_t c) { return c != 0; });
  if (lead == row.end()) return {false, seen_front_};

  const auto j0 = static_cast<std::size_t>(lead - row.begin());
  const std::uint8_t norm = gf256::inv(row[j0]);
  gf256::scale(row, norm);
  gf256::scale(payload, norm);

  for (auto& r : rows_) {
    const std::uint8_t c = r.coeffs[j0];
    if (c == 0) continue;
    gf256::mul_add(r.coeffs, row, c);
    gf256::mul_add(r.payload, payload, c);
  }

  pivot_row_[j0] = static_cast<int>(rows_.size());
  rows_.push_back(Row{static_cast<std::uint32_t>(lo_ + j0), std::move(row), std::move(payload)});

  harvest_decoded();
  while (seen_front_ < hi_ && (is_decoded(seen_front_) || has_pivot(seen_front_))) ++seen_front_;
  while (decoded_front_ < hi_ && is_decoded(decoded_front_)) ++decoded_front_;
  compact();
  release();
  return {true, seen_front_};
}

void Decoder::harvest_decoded() {
  for (std::size_t i = 0; i < rows_.size();) {
    const Row& r = rows_[i];
    const std::size_t p = r.pivot - lo_;
    bool unit = true;
    for (std::size_t j = 0; j < r.coeffs.size() && unit; ++j) {
      unit = (j == p) || r.coeffs[j] == 0;
    }
    if (!unit) {
      ++i;
      continue;
    }
    decoded_col_[p] = true;
    pivot_row_[p] = -1;
    decoded_.emplace(r.pivot, std::move(rows_[i].payload));
    ++decoded_count_;
    if (i + 1 != rows_.size()) {
      rows_[i] = std::move(rows_.back());
      pivot_row_[rows_[i].pivot - lo_] = static_cast<int>(i);
    }
    rows_.pop_back();
  }
}

void Decoder::compact() {
  if (decoded_front_ - lo_ < kCompactThreshold) return;
  const std::size_t shift = decoded_front_ - lo_;
  const auto cut = static_cast<std::ptrdiff_t>(shift);
  for (auto& r : rows_) r.coeffs.erase(r.coeffs.begin(), r.coeffs.begin() + cut);
  pivot_row_.erase(pivot_row_.begin(), pivot_row_.begin() + cut);
  decoded_col_.erase(decoded_col_.begin(), decoded_col_.begin() + cut);
  lo_ = decoded_front_;
}

void Decoder::release() {
  const std::uint32_t limit = std::min(consumed_front_, watermark_);
  decoded_.erase(decoded_.begin(), decoded_.lower_bound(limit));
}

std::vector<DecodedPacket> Decoder::decode() const {
  std::vector<DecodedPacket> out;
  for (auto it = decoded_.lower_bound(consumed_front_); it != decoded_.end(); ++it) {
    out.push_back({it->first, it->second});
  }
  return out;
}

std::vector<Bytes> Decoder::take_in_order(std::size_t max_packets) {
  const std::size_t ready = decoded_front_ - consumed_front_;
  const auto stop = static_cast<std::uint32_t>(consumed_front_ + std::min(ready, max_packets));
  std::vector<Bytes> out;
  out.reserve(stop - consumed_front_);
  for (std::uint32_t i = consumed_front_; i < stop; ++i) {
    out.push_back(decoded_.at(i));  // may still be needed for elimination
  }
  consumed_front_ = stop;
  release();
  return out;
}

}  // namespace nctcp::coding
