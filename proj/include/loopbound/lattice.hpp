#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace loopbound {

/// d-dimensional torus of side L with nearest-neighbour edges. Edge
/// e = v·d + j joins v to v + e_j.
class TorusLattice {
 public:
  TorusLattice(int d, int L);

  int d() const noexcept { return d_; }
  int L() const noexcept { return L_; }
  std::size_t vertex_count() const noexcept { return volume_; }
  std::size_t edge_count() const noexcept { return volume_ * static_cast<std::size_t>(d_); }

  std::size_t shift(std::size_t v, int axis, int step) const;
  std::size_t edge_tail(std::size_t e) const noexcept { return e / static_cast<std::size_t>(d_); }
  std::size_t edge_head(std::size_t e) const { return shift(edge_tail(e), static_cast<int>(e % d_), 1); }
  /// The 2d edges touching v.
  void incident_edges(std::size_t v, std::vector<std::size_t>& out) const;

  std::vector<int> coordinates(std::size_t v) const;
  std::size_t vertex(std::span<const int> coords) const;
  /// Vertex v + w (coordinates added modulo L).
  std::size_t translate(std::size_t v, std::size_t w) const;

 private:
  int d_;
  int L_;
  std::size_t volume_;
  std::vector<std::size_t> stride_;
};

enum class LinkKind : std::uint8_t { Cross, DoubleBar };

struct Link {
  std::size_t edge = 0;
  double time = 0.0;
  LinkKind kind = LinkKind::DoubleBar;
};

/// Links of a configuration, kept sorted by time on every edge.
class LinkConfiguration {
 public:
  struct Entry {
    double time;
    LinkKind kind;
    std::size_t slot;  // index into the flat link list
  };

  LinkConfiguration(const TorusLattice& lattice, double beta);

  const TorusLattice& lattice() const noexcept { return lattice_; }
  double beta() const noexcept { return beta_; }
  std::size_t link_count() const noexcept { return links_.size(); }

  /// Adds a link. Returns false (and changes nothing) if another link at
  /// either endpoint has exactly the same time.
  bool insert(const Link& link);
  /// Removes the link at `time` on `edge`; false if absent.
  bool erase(std::size_t edge, double time);
  /// Removes and returns the link stored at flat index `slot`.
  Link remove_at(std::size_t slot);

  const Link& link_at(std::size_t slot) const { return links_[slot]; }
  const std::vector<Link>& links() const noexcept { return links_; }
  const std::vector<Entry>& edge_links(std::size_t edge) const { return per_edge_[edge]; }
  bool contains(std::size_t edge, double time) const;
  /// True if some link touching v sits exactly at `time`.
  bool vertex_has_time(std::size_t v, double time) const;

 private:
  TorusLattice lattice_;
  double beta_;
  std::vector<std::vector<Entry>> per_edge_;
  std::vector<Link> links_;
};

/// Loops of a configuration: every vertical segment (between consecutive
/// link events at a vertex) carries the id of its loop.
class LoopDecomposition {
 public:
  std::size_t loop_count() const noexcept { return loop_count_; }
  /// Loop through (v, t) for 0 <= t < β.
  std::size_t loop_of(std::size_t v, double t) const;
  /// Loop through (v, 0) for every vertex.
  std::vector<std::size_t> loops_at_zero() const;

 private:
  friend LoopDecomposition trace_loops(const LinkConfiguration& config);
  std::vector<std::vector<double>> event_times_;      // per vertex, ascending
  std::vector<std::vector<std::size_t>> segment_loop_;  // segment ending at event i
  std::vector<std::size_t> lone_loop_;                // vertices without events
  std::size_t loop_count_ = 0;
};

/// Full trace of all loops.
LoopDecomposition trace_loops(const LinkConfiguration& config);

/// |𝓛(ω ∪ {link})| - |𝓛(ω)| for a link not in ω, by walking the loop through
/// one endpoint. `excluded` (edge, time) is treated as absent.
int delta_loops_on_insert(const LinkConfiguration& config, const Link& link,
                          std::optional<std::pair<std::size_t, double>> excluded = std::nullopt);

/// Loop-count change from toggling `link`: removal if present, insertion otherwise.
int delta_loops_on_toggle(const LinkConfiguration& config, const Link& link);

}  // namespace loopbound
