#pragma once

#include <array>
#include <cstdint>

namespace alphamerton {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A stream is identified by (seed, stream_id); the stream id occupies the
/// upper half of the 128-bit counter, the draw index the lower half. Any
/// path's draws are therefore a pure function of (seed, path index) and never
/// depend on which worker produced them.
class PhiloxStream {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  PhiloxStream(std::uint64_t seed, std::uint64_t stream_id);

  /// Raw block function, exposed for known-answer tests.
  static Counter block(Counter counter, Key key);

  std::uint32_t next_u32();
  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double next_uniform();
  /// Standard normal via Box-Muller; both variates of each pair are used.
  double next_normal();

 private:
  void refill();

  Key key_;
  Counter counter_;
  Counter buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace alphamerton
