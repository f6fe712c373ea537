#pragma once

#include <cmath>
#include <cstdint>

namespace lfk {

// Splittable counter-based stream: output i of stream (seed, stream_id) is a
// bit-mix of a 64-bit counter, so independent batches can be generated in any
// order (or in parallel) and still reproduce bit-identically.
class RngStream {
  public:
    RngStream(uint64_t seed, uint64_t stream_id) {
        base_ = mix(seed + 0x9E3779B97F4A7C15ull * (stream_id + 1));
        ctr_ = 0;
        cached_ = 0.0;
        have_cached_ = false;
    }

    uint64_t next_u64() { return mix(base_ + 0x9E3779B97F4A7C15ull * ++ctr_); }

    // uniform on (0,1); never returns 0 or 1
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        // polar Marsaglia; draw count is data dependent but fully determined
        // by the stream state
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double r = std::sqrt(-2.0 * std::log(s) / s);
        cached_ = v * r;
        have_cached_ = true;
        return u * r;
    }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

    static uint64_t mix(uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

  private:
    uint64_t base_, ctr_;
    double cached_;
    bool have_cached_;
};

} // namespace lfk
