#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace vortrace {

/// Integer wavevector on the dual lattice; (0,0) is excluded everywhere
/// (fields are mean-zero).
struct Wavevector {
    int k1 = 0;
    int k2 = 0;

    bool operator==(const Wavevector&) const = default;

    Wavevector perp() const { return {k2, -k1}; }  // k^perp = (k2, -k1)
    Wavevector operator-() const { return {-k1, -k2}; }
    int norm2() const { return k1 * k1 + k2 * k2; }
    double norm() const { return std::sqrt(static_cast<double>(norm2())); }
    int ring() const { return std::max(std::abs(k1), std::abs(k2)); }

    /// Half-lattice Z^2_+: k2 > 0, or k2 = 0 and k1 > 0. Stored coefficients
    /// live here; the k2 < 0 half is implied by conjugation.
    bool in_half_lattice() const { return k2 > 0 || (k2 == 0 && k1 > 0); }
};

/// Cutoff-indexed enumeration of the stored (half-lattice) modes of the
/// square truncation max(|k1|,|k2|) <= N.
///
/// Modes are ordered by ring max(|k1|,|k2|), so the table for cutoff N is a
/// prefix of the table for any larger cutoff. Trajectory noise is addressed
/// by this slot index, which keeps realizations matched when the cutoff
/// grows and the extra modes carry zero forcing.
class ModeTable {
  public:
    explicit ModeTable(int cutoff) : cutoff_(cutoff) {
        if (cutoff < 1) throw std::invalid_argument("ModeTable: cutoff must be >= 1");
        for (int ring = 1; ring <= cutoff; ++ring) {
            // fixed scan order inside the ring: k2 rows bottom-up, k1 left-right
            for (int k2 = -ring; k2 <= ring; ++k2) {
                for (int k1 = -ring; k1 <= ring; ++k1) {
                    const Wavevector k{k1, k2};
                    if (k.ring() != ring || !k.in_half_lattice()) continue;
                    modes_.push_back(k);
                }
            }
        }
    }

    int cutoff() const { return cutoff_; }
    std::size_t size() const { return modes_.size(); }
    const Wavevector& operator[](std::size_t i) const { return modes_[i]; }
    const std::vector<Wavevector>& modes() const { return modes_; }

    /// Slot of a half-lattice mode, or npos when outside the cutoff.
    std::size_t index_of(const Wavevector& k) const {
        if (!k.in_half_lattice() || k.ring() > cutoff_) return npos;
        const int ring = k.ring();
        // modes strictly inside ring-1 box: half of ((2r-1)^2 - 1)
        std::size_t base = static_cast<std::size_t>((2 * ring - 1) * (2 * ring - 1) - 1) / 2;
        std::size_t off = 0;
        for (int k2 = -ring; k2 <= ring; ++k2) {
            for (int k1 = -ring; k1 <= ring; ++k1) {
                const Wavevector m{k1, k2};
                if (m.ring() != ring || !m.in_half_lattice()) continue;
                if (m == k) return base + off;
                ++off;
            }
        }
        return npos;
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  private:
    int cutoff_;
    std::vector<Wavevector> modes_;
};

/// Number of stored (half-lattice) modes for cutoff N: ((2N+1)^2 - 1)/2.
inline std::size_t half_mode_count(int cutoff) {
    return static_cast<std::size_t>((2 * cutoff + 1) * (2 * cutoff + 1) - 1) / 2;
}

}  // namespace vortrace
