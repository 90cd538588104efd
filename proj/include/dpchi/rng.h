//
// Copyright 2026 The dpchi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DPCHI_RNG_H_
#define DPCHI_RNG_H_

#include <array>
#include <cstdint>
#include <limits>

namespace dpchi {

// Philox4x32 with 10 rounds (Salmon et al., "Parallel random numbers: as easy
// as 1, 2, 3"). A pure function of a 128-bit counter and a 64-bit key.
class Philox4x32 {
 public:
  using Counter = std::array<uint32_t, 4>;
  using Key = std::array<uint32_t, 2>;

  static Counter Generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      ctr = Round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr uint32_t kMul0 = 0xD2511F53u;
  static constexpr uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr uint32_t kWeyl1 = 0xBB67AE85u;

  static Counter Round(const Counter& ctr, const Key& key) {
    const uint64_t p0 = static_cast<uint64_t>(kMul0) * ctr[0];
    const uint64_t p1 = static_cast<uint64_t>(kMul1) * ctr[2];
    const auto hi0 = static_cast<uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<uint32_t>(p0);
    const auto hi1 = static_cast<uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<uint32_t>(p1);
    return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
};

// A reproducible random stream addressed by (master_seed, stream_id). The
// master seed is the Philox key; the stream id occupies the high half of the
// counter and the position the low half, so distinct ids never share blocks.
//
// Satisfies UniformRandomBitGenerator (64-bit output). Single owner: copy it
// to fork an identical sequence, use Split() for an independent child.
class RngStream {
 public:
  using result_type = uint64_t;

  RngStream(uint64_t master_seed, uint64_t stream_id)
      : master_seed_(master_seed), stream_id_(stream_id) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    if (buffered_ == 0) Refill();
    --buffered_;
    return block_[buffered_];
  }

  // Uniform double in [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform double in the open interval (0, 1).
  double UniformOpen() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  // An independent stream derived from this stream's identity and `child`.
  // Does not consume from this stream.
  RngStream Split(uint64_t child) const {
    return RngStream(master_seed_, Mix(stream_id_ ^ Mix(child + 1)));
  }

  uint64_t master_seed() const { return master_seed_; }
  uint64_t stream_id() const { return stream_id_; }
  uint64_t position() const { return position_; }

 private:
  // SplitMix64 finalizer.
  static uint64_t Mix(uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  void Refill() {
    const Philox4x32::Counter ctr = {
        static_cast<uint32_t>(position_), static_cast<uint32_t>(position_ >> 32),
        static_cast<uint32_t>(stream_id_),
        static_cast<uint32_t>(stream_id_ >> 32)};
    const Philox4x32::Key key = {static_cast<uint32_t>(master_seed_),
                                 static_cast<uint32_t>(master_seed_ >> 32)};
    const Philox4x32::Counter out = Philox4x32::Generate(ctr, key);
    ++position_;
    // Served back to front by operator().
    block_[1] = (static_cast<uint64_t>(out[1]) << 32) | out[0];
    block_[0] = (static_cast<uint64_t>(out[3]) << 32) | out[2];
    buffered_ = 2;
  }

  uint64_t master_seed_;
  uint64_t stream_id_;
  uint64_t position_ = 0;
  std::array<uint64_t, 2> block_{};
  int buffered_ = 0;
};

}  // namespace dpchi

#endif  // DPCHI_RNG_H_
